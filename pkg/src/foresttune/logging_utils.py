"""Standardized logging configuration."""

import logging
import sys
from typing import Optional

from foresttune.config import config


def setup_logger(name: str, level: Optional[int] = None) -> logging.Logger:
    """
    Create a standardized logger writing to stderr.

    Args:
        name: Logger name (usually __name__)
        level: Logging level (defaults to FORESTTUNE_LOG_LEVEL)

    Returns:
        Configured logger instance
    """
    if level is None:
        level = logging.getLevelName(config.LOG_LEVEL)
        if not isinstance(level, int):
            level = logging.INFO

    logger = logging.getLogger(name)
    logger.setLevel(level)

    if not logger.handlers:
        # stdout carries CSV output, diagnostics stay on stderr
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(level)

        formatter = logging.Formatter(
            fmt="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger
