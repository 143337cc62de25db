"""Tests for the baseline tuners."""

import pytest

from foresttune.errors import TunerError
from foresttune.forest.params import HyperParams
from foresttune.tuning.baselines import (
    caret_candidates,
    mtry_walk_path,
    tune_grid_caret,
    tune_mtry_walk,
    tune_random,
)

ERRORS = {1: 1.3, 2: 1.2, 4: 1.0, 8: 0.5, 16: 0.49}


def test_walk_stops_on_small_gain():
    """Test the down-then-up walk on a fixed error table."""
    path = mtry_walk_path(ERRORS.__getitem__, start=4, p=16)

    assert path == [(4, 1.0), (2, 1.2), (8, 0.5), (16, 0.49)]


def test_walk_continues_while_improving():
    """Test that the walk keeps stepping down while the error drops enough."""
    errors = {8: 1.0, 4: 0.8, 2: 0.6, 1: 0.59, 16: 1.1}
    path = mtry_walk_path(errors.__getitem__, start=8, p=16)

    assert [m for m, _ in path] == [8, 4, 2, 1, 16]


def test_walk_respects_bounds():
    """Test that the walk never leaves [1, p]."""
    path = mtry_walk_path(lambda m: 1.0 / m, start=1, p=3, step_factor=2.0, improve=0.0)

    assert [m for m, _ in path] == [1, 2, 3]
    with pytest.raises(TunerError):
        mtry_walk_path(lambda m: 1.0, start=2, p=4, step_factor=1.0)


def test_caret_candidates():
    """Test the three-point mtry grid."""
    assert caret_candidates(10) == [1, 6, 10]
    assert caret_candidates(2) == [1, 2]
    assert caret_candidates(3) == [1, 2, 3]


def test_tune_mtry_walk_returns_defaults_with_mtry(binary_dataset):
    """Test that only mtry changes."""
    params = tune_mtry_walk(binary_dataset, num_trees=10, seed=0)
    defaults = HyperParams.for_dataset(binary_dataset, num_trees=10)

    assert 1 <= params.mtry <= binary_dataset.p
    assert params.with_updates(mtry=defaults.mtry) == defaults


def test_tune_grid_caret_picks_a_candidate(binary_dataset, regression_dataset):
    """Test the bootstrap-holdout grid on both tasks."""
    clf = tune_grid_caret(binary_dataset, bootstrap_iters=3, num_trees=5, seed=0)
    reg = tune_grid_caret(regression_dataset, bootstrap_iters=2, num_trees=5, seed=0)

    assert clf.mtry in caret_candidates(binary_dataset.p)
    assert reg.mtry in caret_candidates(regression_dataset.p)


def test_tune_grid_caret_validation(binary_dataset):
    """Test argument checks."""
    with pytest.raises(TunerError):
        tune_grid_caret(binary_dataset, bootstrap_iters=0)


def test_tune_random_is_seeded(binary_dataset):
    """Test random search returns a reproducible in-space configuration."""
    a = tune_random(binary_dataset, points=4, num_trees=5, seed=2)
    b = tune_random(binary_dataset, points=4, num_trees=5, seed=2)

    assert a == b
    assert 0.2 <= a.sample_fraction <= 0.9
    assert not a.replace
    with pytest.raises(TunerError):
        tune_random(binary_dataset, points=0)
