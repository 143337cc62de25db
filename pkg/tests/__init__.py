"""Tests for the foresttune package."""
