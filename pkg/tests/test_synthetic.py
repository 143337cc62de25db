"""Tests for synthetic fixture generation."""

import numpy as np

from foresttune.data.dataset import Task, load_csv
from foresttune.data.synthetic import (
    fixture_suite,
    generate_fixtures,
    synth_blobs,
    synth_friedman1,
    synth_monks2,
    synth_sparse_signal,
)


def test_monks2_is_full_factorial():
    """Test that MONK-2 holds every attribute combination once."""
    dataset = synth_monks2()

    assert dataset.n == 432
    assert dataset.p == 6
    assert all(t.is_categorical for t in dataset.column_types.values())
    assert len(dataset.features.drop_duplicates()) == 432


def test_monks2_label_rule():
    """Test that the label is 1 iff exactly two attributes equal 2."""
    dataset = synth_monks2()
    twos = (dataset.features.astype(str) == "2").sum(axis=1).to_numpy()
    labels = dataset.target.astype(str).to_numpy()

    np.testing.assert_array_equal(labels == "1", twos == 2)


def test_sparse_signal_shape():
    """Test column counts, names and class balance."""
    dataset = synth_sparse_signal(n=101, informative=3, noise=7, seed=0)

    assert dataset.name == "sparse_3_7"
    assert dataset.p == 10
    assert dataset.feature_names[:3] == ["inf_1", "inf_2", "inf_3"]
    assert abs(int((dataset.y == 1).sum()) - int((dataset.y == 0).sum())) <= 1


def test_sparse_signal_is_seeded():
    """Test that the same seed gives the same data."""
    a = synth_sparse_signal(n=50, informative=2, noise=3, seed=4)
    b = synth_sparse_signal(n=50, informative=2, noise=3, seed=4)

    np.testing.assert_array_equal(a.features.to_numpy(), b.features.to_numpy())


def test_blobs_and_friedman_tasks():
    """Test task types of the remaining generators."""
    blobs = synth_blobs(n=30, classes=3, p=2, seed=0)
    friedman = synth_friedman1(n=30, seed=0)

    assert blobs.task is Task.CLASSIFICATION
    assert blobs.n_classes == 3
    assert friedman.task is Task.REGRESSION
    assert friedman.p == 10


def test_generate_fixtures_writes_loadable_csv(tmp_path):
    """Test that every fixture is written and loads back."""
    written = generate_fixtures(tmp_path, seed=0)
    suite = fixture_suite(seed=0)

    assert set(written) == set(suite)
    for name, path in written.items():
        assert path.exists()
        reloaded = load_csv(path, "y")
        assert reloaded.n == suite[name].n
        assert reloaded.column_types == suite[name].column_types
        assert reloaded.task is Task.CLASSIFICATION


def test_sparse_signal_noise_is_uncorrelated_with_label():
    """Test that noise columns barely correlate with the label while informative ones do."""
    dataset = synth_sparse_signal(n=1000, informative=5, noise=10, seed=0)
    y = dataset.y.astype(np.float64)
    rho = np.array([np.corrcoef(dataset.features[column], y)[0, 1] for column in dataset.feature_names])

    assert np.all(np.abs(rho[5:]) < 0.1)
    assert np.all(rho[:5] > 0.3)
