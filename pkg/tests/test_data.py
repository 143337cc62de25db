"""Tests for dataset loading, validation and CSV writing."""

import warnings

import numpy as np
import pandas as pd
import pytest

from foresttune.data.dataset import (
    ColumnKind,
    ColumnType,
    Task,
    kind_overrides,
    load_csv,
    load_feature_rows,
    schema_path,
    write_csv,
)
from foresttune.data.synthetic import synth_monks2, synth_sparse_signal
from foresttune.errors import (
    DataError,
    DataFileNotFoundError,
    EmptyDatasetError,
    MissingTargetError,
    MissingValueError,
    RaggedRowError,
)

MIXED_CSV = "size,color,y\n1.5,red,a\n2,blue,b\n3.25,red,a\n0,green,b\n"


def test_load_csv_infers_schema(write_csv_text):
    """Test that numeric and categorical columns are inferred."""
    dataset = load_csv(write_csv_text(MIXED_CSV), "y")

    assert dataset.n == 4
    assert dataset.p == 2
    assert dataset.task is Task.CLASSIFICATION
    assert dataset.classes == ("a", "b")
    assert dataset.column_types["size"].kind is ColumnKind.NUMERIC
    assert dataset.column_types["color"].levels == ("red", "blue", "green")
    np.testing.assert_array_equal(dataset.y, [0, 1, 0, 1])
    np.testing.assert_array_equal(dataset.codes("color"), [0, 1, 0, 2])


def test_numeric_target_is_regression(write_csv_text):
    """Test that a numeric target makes a regression task."""
    dataset = load_csv(write_csv_text("x,y\n1,0.5\n2,1.5\n3,2.5\n"), "y")

    assert dataset.task is Task.REGRESSION
    np.testing.assert_allclose(dataset.y, [0.5, 1.5, 2.5])


def test_override_makes_numeric_target_categorical(write_csv_text):
    """Test that a kind override turns 0/1 labels into classes."""
    path = write_csv_text("x,y\n1,0\n2,1\n3,0\n")
    dataset = load_csv(path, "y", kind_overrides(categorical=["y"]))

    assert dataset.task is Task.CLASSIFICATION
    assert dataset.classes == ("0", "1")


def test_override_numeric_column_rejects_text(write_csv_text):
    """Test that forcing a text column numeric fails."""
    with pytest.raises(DataError):
        load_csv(write_csv_text(MIXED_CSV), "y", kind_overrides(numeric=["color"]))


def test_missing_file_raises(tmp_path):
    """Test the diagnostic for a missing file."""
    with pytest.raises(DataFileNotFoundError):
        load_csv(tmp_path / "nope.csv", "y")


def test_missing_file_is_file_not_found(tmp_path):
    """Test that the data error keeps the builtin contract."""
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "nope.csv", "y")


def test_missing_target_raises(write_csv_text):
    """Test the diagnostic for an absent target column."""
    with pytest.raises(MissingTargetError):
        load_csv(write_csv_text(MIXED_CSV), "label")


def test_missing_value_raises(write_csv_text):
    """Test that an empty cell is rejected."""
    with pytest.raises(MissingValueError):
        load_csv(write_csv_text("x,y\n1,a\n,b\n"), "y")


def test_ragged_row_raises(write_csv_text):
    """Test that a row with the wrong field count is rejected."""
    with pytest.raises(RaggedRowError):
        load_csv(write_csv_text("x,z,y\n1,2,a\n3,b\n"), "y")


def test_empty_file_raises(write_csv_text):
    """Test that an empty file is rejected."""
    with pytest.raises(EmptyDatasetError):
        load_csv(write_csv_text(""), "y")


def test_header_only_raises(write_csv_text):
    """Test that a header without rows is rejected."""
    with pytest.raises(EmptyDatasetError):
        load_csv(write_csv_text("x,y\n"), "y")


def test_categorical_needs_levels():
    """Test that a categorical column type needs levels."""
    with pytest.raises(DataError):
        ColumnType(ColumnKind.CATEGORICAL)


def test_take_keeps_schema(write_csv_text):
    """Test that a row subset keeps columns, classes and levels."""
    dataset = load_csv(write_csv_text(MIXED_CSV), "y")
    subset = dataset.take([1, 1, 3])

    assert subset.n == 3
    assert subset.classes == dataset.classes
    assert subset.column_types == dataset.column_types
    np.testing.assert_array_equal(subset.y, [1, 1, 1])


def assert_same_dataset(reloaded, original):
    assert reloaded.task is original.task
    assert reloaded.classes == original.classes
    assert reloaded.feature_names == original.feature_names
    assert reloaded.column_types == original.column_types
    np.testing.assert_array_equal(reloaded.y, original.y)
    for column, column_type in original.column_types.items():
        if column_type.is_categorical:
            np.testing.assert_array_equal(reloaded.codes(column), original.codes(column))
        else:
            np.testing.assert_array_equal(
                reloaded.features[column].to_numpy(), original.features[column].to_numpy()
            )


def test_write_csv_reloads_identically(tmp_path, mixed_dataset):
    """Test that write_csv output loads back to the same data."""
    path = tmp_path / "mixed.csv"
    write_csv(mixed_dataset, path)

    assert_same_dataset(load_csv(path, "y"), mixed_dataset)


def test_monks2_reloads_as_categorical_classification(tmp_path):
    """Test that 1/2/3-coded attributes and 0/1 labels stay categorical after a reload."""
    original = synth_monks2()
    path = tmp_path / "monks2.csv"
    write_csv(original, path)

    reloaded = load_csv(path, "y")

    assert schema_path(path).exists()
    assert reloaded.task is Task.CLASSIFICATION
    assert all(column_type.is_categorical for column_type in reloaded.column_types.values())
    assert_same_dataset(reloaded, original)


def test_sparse_signal_reloads_identically(tmp_path):
    """Test that numeric columns survive a write and reload bit for bit."""
    original = synth_sparse_signal(n=40, informative=3, noise=12, seed=5)
    path = tmp_path / "sparse.csv"
    write_csv(original, path)

    assert_same_dataset(load_csv(path, "y"), original)


def test_override_beats_schema_sidecar(tmp_path):
    """Test that explicit kind overrides take precedence over the sidecar."""
    path = tmp_path / "monks2.csv"
    write_csv(synth_monks2(), path)

    dataset = load_csv(path, "y", kind_overrides(numeric=["a1", "y"]))

    assert dataset.task is Task.REGRESSION
    assert dataset.column_types["a1"].kind is ColumnKind.NUMERIC
    assert dataset.column_types["a2"].levels == ("1", "2", "3")


def test_from_frame_builds_wide_frame_in_one_piece():
    """Test that a wide dataset is assembled without fragmentation warnings."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", pd.errors.PerformanceWarning)
        dataset = synth_sparse_signal(n=50, informative=5, noise=200, seed=0)

    assert dataset.p == 205


def test_overlong_row_raises(write_csv_text):
    """Test that a row with extra fields is rejected."""
    with pytest.raises(RaggedRowError):
        load_csv(write_csv_text("x,y\n1,a\n2,b,3\n"), "y")


def test_missing_value_is_not_ragged(write_csv_text):
    """Test that an empty trailing field is a missing value, not a short row."""
    with pytest.raises(MissingValueError):
        load_csv(write_csv_text("x,z,y\n1,2,a\n3,4,\n"), "y")


def test_load_feature_rows_without_target(write_csv_text):
    """Test that prediction rows need no target column."""
    frame = load_feature_rows(write_csv_text("size,color\n1,red\n2,blue\n"))

    assert list(frame.columns) == ["size", "color"]
    assert len(frame) == 2
