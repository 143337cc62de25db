"""Shared pytest fixtures and configuration."""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from foresttune.data.dataset import ColumnType, Dataset, Task
from foresttune.data.synthetic import synth_blobs, synth_friedman1, synth_mixed


@pytest.fixture(scope="session")
def project_root():
    """Return project root directory."""
    return Path(__file__).parent.parent


@pytest.fixture
def binary_dataset():
    """Create a small two-class numeric dataset."""
    return synth_blobs(n=60, classes=2, p=3, seed=0)


@pytest.fixture
def multiclass_dataset():
    """Create a small three-class numeric dataset."""
    return synth_blobs(n=60, classes=3, p=3, seed=1)


@pytest.fixture
def regression_dataset():
    """Create a small Friedman #1 regression dataset."""
    return synth_friedman1(n=60, seed=0, noise_columns=1)


@pytest.fixture
def mixed_dataset():
    """Create a binary dataset with a categorical column."""
    return synth_mixed(n=80, seed=0)


@pytest.fixture
def constant_feature_dataset():
    """Create a binary dataset whose second column is constant."""
    rng = np.random.default_rng(3)
    x = rng.standard_normal(80)
    frame = pd.DataFrame({
        "signal": x,
        "constant": np.ones(80),
        "y": np.where(x > 0, "pos", "neg"),
    })
    return Dataset.from_frame(
        name="constant",
        frame=frame,
        target="y",
        column_types={"signal": ColumnType.numeric(), "constant": ColumnType.numeric()},
        task=Task.CLASSIFICATION,
        classes=("neg", "pos"),
    )


@pytest.fixture
def write_csv_text(tmp_path):
    """Return a helper writing CSV text to a temporary file."""
    def _write(text: str, name: str = "data.csv") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
