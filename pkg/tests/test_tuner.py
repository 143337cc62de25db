"""Tests for the OOB tuner: recommendation, runtime estimate and reporting."""

import numpy as np
import pytest

from foresttune.config import config
from foresttune.data.dataset import Task
from foresttune.data.synthetic import synth_monks2, synth_sparse_signal
from foresttune.errors import IncompatibleMeasureError, TunerError
from foresttune.forest.ensemble import train
from foresttune.forest.params import HyperParams
from foresttune.metrics.measures import AUC, BRIER_MULTICLASS, MMCE
from foresttune.oob.curves import oob_measure
from foresttune.tuning import tuner
from foresttune.tuning.smbo import DesignPoint, SmboHistory
from foresttune.tuning.space import default_space, encode
from foresttune.tuning.tuner import (
    TuneConfig,
    estimate_time,
    format_duration,
    format_recommendation,
    recommend,
    recommend_fragment,
    tune,
    tuning_base,
)

BEST_FIVE = [
    {"mtry": 2, "sample_fraction": 0.3, "min_node_size": 1},
    {"mtry": 3, "sample_fraction": 0.4, "min_node_size": 2},
    {"mtry": 3, "sample_fraction": 0.5, "min_node_size": 2},
    {"mtry": 4, "sample_fraction": 0.6, "min_node_size": 3},
    {"mtry": 5, "sample_fraction": 0.7, "min_node_size": 3},
]


@pytest.fixture
def known_history():
    """100 evaluations whose five best are BEST_FIVE, plus one failed point."""
    space = default_space(Task.CLASSIFICATION, n=100, p=10)
    rng = np.random.default_rng(0)
    objectives = rng.permutation(np.arange(100, dtype=np.float64))
    points = []
    for i, objective in enumerate(objectives):
        rank = int(objective)
        decoded = BEST_FIVE[rank] if rank < 5 else {"mtry": 10, "sample_fraction": 0.9, "min_node_size": 20}
        points.append(DesignPoint(
            iteration=i,
            point=encode(space, decoded),
            decoded=decoded,
            objective=objective,
            wall_time=0.0,
        ))
    # a failed point ranks last whatever its recorded objective
    slot = int(np.flatnonzero(objectives == 50.0)[0])
    points[slot] = DesignPoint(
        iteration=slot,
        point=np.zeros(3),
        decoded={"mtry": 1, "sample_fraction": 0.2, "min_node_size": 1},
        objective=-1.0,
        wall_time=0.0,
        failed=True,
    )
    history = SmboHistory(points=points, space=space, warmup=30, iters=70, candidates=10, seed=0)
    return history, space


def test_recommend_averages_best_five(known_history):
    """Test the rounded mean of the best 5% of 100 points."""
    history, space = known_history
    fragment = recommend_fragment(history, space)

    assert fragment["mtry"] == 3
    assert fragment["sample_fraction"] == pytest.approx(0.5)
    assert fragment["min_node_size"] == 2


def test_recommend_merges_into_defaults(known_history):
    """Test that untuned fields come from the task defaults."""
    history, space = known_history
    params = recommend(history, space)

    assert params.mtry == 3
    assert params.num_trees == 500
    assert params.replace


def test_tuning_base_subsamples_when_fraction_tuned(binary_dataset):
    """Test replace=False only when sample_fraction is tuned alone."""
    assert not tuning_base(binary_dataset, TuneConfig(num_trees=10)).replace
    assert tuning_base(binary_dataset, TuneConfig(num_trees=10, parameters=("mtry",))).replace
    assert tuning_base(
        binary_dataset, TuneConfig(num_trees=10, parameters=("sample_fraction", "replace"))
    ).replace


def test_config_validation():
    """Test tuning configuration checks."""
    with pytest.raises(TunerError):
        TuneConfig(warmup=1)
    with pytest.raises(TunerError):
        TuneConfig(iters=-1)
    with pytest.raises(TunerError):
        TuneConfig(parameters=())
    assert TuneConfig(warmup=3, iters=4).evaluations == 7


def test_estimate_time_formula(monkeypatch, binary_dataset):
    """Test t * evaluations + 50 with a mocked training time."""
    monkeypatch.setattr(tuner, "_time_default_training", lambda dataset, cfg: 1.5)
    cfg = TuneConfig(warmup=10, iters=20, num_trees=10)

    assert estimate_time(binary_dataset, cfg) == 1.5 * 30 + 50


def test_format_duration():
    """Test duration strings."""
    assert format_duration(73) == "1M 13S"
    assert format_duration(50) == "50S"
    assert format_duration(3723) == "1H 2M 3S"
    assert format_duration(3600) == "1H 0M 0S"
    assert format_duration(0.4) == "0S"


def test_tune_end_to_end(binary_dataset):
    """Test a small tuning run and its report."""
    cfg = TuneConfig(num_trees=15, warmup=3, iters=2, candidates=40, seed=4)
    result = tune(binary_dataset, cfg)

    assert len(result.history) == 5
    assert 1 <= result.recommended.mtry <= binary_dataset.p
    assert 0.2 <= result.recommended.sample_fraction <= 0.9
    assert result.model.num_trees == 15
    assert result.measure.name == "brier"
    text = format_recommendation(result)
    assert text.startswith("Recommended parameter settings:")
    assert "Results:" in text
    assert "exec.time" in text
    assert "Model: mtry=" in text


def test_tune_is_reproducible(binary_dataset):
    """Test that a seed reproduces the recommendation."""
    cfg = TuneConfig(num_trees=10, warmup=3, iters=1, candidates=20, seed=9, measure=MMCE)
    a = tune(binary_dataset, cfg)
    b = tune(binary_dataset, cfg)

    assert a.recommended == b.recommended
    np.testing.assert_array_equal(a.history.objectives(), b.history.objectives())


def test_tune_rejects_incompatible_measure(multiclass_dataset):
    """Test that AUC cannot tune a three-class task."""
    with pytest.raises(IncompatibleMeasureError):
        tune(multiclass_dataset, TuneConfig(num_trees=5, warmup=2, iters=0, measure=AUC))


@pytest.mark.slow
def test_sparse_signal_wants_more_candidates():
    """Test that tuning on 20 informative among 500 columns raises mtry above 22 and beats defaults."""
    wins = 0
    for seed in range(5):
        dataset = synth_sparse_signal(n=500, informative=20, noise=480, seed=seed)
        cfg = TuneConfig(
            measure=BRIER_MULTICLASS, num_trees=100, warmup=10, iters=20, seed=seed, workers=config.WORKERS
        )
        result = tune(dataset, cfg)
        default = train(dataset, HyperParams.for_dataset(dataset, num_trees=100), seed, workers=config.WORKERS)

        default_brier = oob_measure(default, dataset, BRIER_MULTICLASS)
        tuned_brier = oob_measure(result.model, dataset, BRIER_MULTICLASS)
        wins += result.recommended.mtry > 22 and tuned_brier < default_brier
    assert wins >= 4


@pytest.mark.slow
def test_monks2_recommends_nearly_all_attributes():
    """Test that Brier tuning on MONK-2 recommends mtry of at least 5 of 6."""
    dataset = synth_monks2()
    cfg = TuneConfig(measure=BRIER_MULTICLASS, num_trees=200, warmup=10, iters=30, seed=0, workers=config.WORKERS)

    result = tune(dataset, cfg)

    assert result.recommended.mtry >= 5
