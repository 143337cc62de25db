"""Tests for the SMBO loop, the forest surrogate and expected improvement."""

import numpy as np
import pytest
from scipy.stats import norm

from foresttune.errors import SmboError
from foresttune.tuning.smbo import (
    DesignPoint,
    expected_improvement,
    fit_surrogate,
    propose,
    run_smbo,
    surrogate_mean_sd,
)
from foresttune.tuning.space import ParamSpace, ParamSpec


@pytest.fixture
def unit_square():
    """Two continuous parameters on [0, 1]."""
    return ParamSpace(specs=(ParamSpec.continuous("x", 0.0, 1.0), ParamSpec.continuous("y", 0.0, 1.0)))


def bowl(fragment, iteration):
    return (fragment["x"] - 0.7) ** 2 + (fragment["y"] - 0.3) ** 2


def test_ei_closed_forms():
    """Test the zero-variance limit and the standard normal case."""
    assert expected_improvement(0.25, 0.0, 1.0) == 0.75
    assert expected_improvement(1.5, 0.0, 1.0) == 0.0
    assert expected_improvement(1.0, 1.0, 1.0) == pytest.approx(norm.pdf(0.0), abs=1e-12)
    assert expected_improvement(1.0, 1.0, 1.0) == pytest.approx(0.39894, abs=1e-5)


def test_ei_is_non_negative():
    """Test EI >= 0 on random inputs."""
    rng = np.random.default_rng(0)
    mean = rng.normal(0, 10, 100_000)
    sd = np.abs(rng.normal(0, 5, 100_000))
    sd[::7] = 0.0
    best = rng.normal(0, 10)

    ei = expected_improvement(mean, sd, best)
    assert ei.shape == (100_000,)
    assert np.all(ei >= 0.0)


def test_surrogate_needs_two_points():
    """Test surrogate preconditions."""
    point = DesignPoint(iteration=0, point=np.array([0.5]), decoded={}, objective=1.0, wall_time=0.0)
    with pytest.raises(SmboError):
        fit_surrogate([point], seed=0)
    bad = DesignPoint(iteration=1, point=np.array([0.1]), decoded={}, objective=np.nan, wall_time=0.0)
    with pytest.raises(SmboError):
        fit_surrogate([point, bad], seed=0)


def test_surrogate_and_proposal():
    """Test surrogate predictions and that proposals stay in the cube."""
    rng = np.random.default_rng(1)
    design = [
        DesignPoint(iteration=i, point=p, decoded={}, objective=float(p.sum()), wall_time=0.0)
        for i, p in enumerate(rng.random((12, 2)))
    ]
    model = fit_surrogate(design, seed=3)
    mean, sd = surrogate_mean_sd(model, rng.random((5, 2)))

    assert model.tree_predictions(np.zeros((4, 2))).shape == (100, 4)
    assert mean.shape == sd.shape == (5,)
    assert np.all(sd >= 0)
    point = propose(model, best_so_far=0.2, candidates=50, rng=np.random.default_rng(2))
    assert point.shape == (2,)
    assert np.all((point >= 0) & (point <= 1))


def test_history_size_and_phases(unit_square):
    """Test the number and phase of evaluated points."""
    history = run_smbo(bowl, unit_square, warmup=4, iters=3, seed=0, candidates=50)

    assert len(history) == 7
    assert [p.phase for p in history.points] == ["warmup"] * 4 + ["smbo"] * 3
    assert [p.iteration for p in history.points] == list(range(7))
    frame = history.to_frame()
    assert list(frame.columns) == [
        "iteration", "phase", "x", "y", "objective", "best_so_far", "failed", "wall_time",
    ]
    assert frame["best_so_far"].is_monotonic_decreasing


def test_same_seed_same_history(unit_square):
    """Test that a seed reproduces the whole run."""
    a = run_smbo(bowl, unit_square, warmup=3, iters=2, seed=5, candidates=30)
    b = run_smbo(bowl, unit_square, warmup=3, iters=2, seed=5, candidates=30)

    np.testing.assert_array_equal(a.objectives(), b.objectives())
    np.testing.assert_array_equal(
        np.vstack([p.point for p in a.points]), np.vstack([p.point for p in b.points])
    )


def test_failures_get_worst_value(unit_square):
    """Test that failed evaluations are imputed with the worst success."""
    def flaky(fragment, iteration):
        if iteration in (1, 5):
            raise RuntimeError("boom")
        if iteration == 6:
            return float("inf")
        return bowl(fragment, iteration)

    history = run_smbo(flaky, unit_square, warmup=4, iters=3, seed=1, candidates=30)

    assert history.failures == 3
    successes = [p.objective for p in history.points if not p.failed]
    warmup_successes = [p.objective for p in history.points[:4] if not p.failed]
    assert history.points[1].objective == max(warmup_successes)
    assert history.points[6].objective == max(successes)
    assert not history.best().failed


def test_all_warmup_failures_raise(unit_square):
    """Test that a run with no successful warmup point aborts."""
    def broken(fragment, iteration):
        raise ValueError("always")

    with pytest.raises(SmboError):
        run_smbo(broken, unit_square, warmup=3, iters=1, seed=0)


def test_run_arguments(unit_square):
    """Test warmup and iteration validation."""
    with pytest.raises(SmboError):
        run_smbo(bowl, unit_square, warmup=1, iters=1, seed=0)
    with pytest.raises(SmboError):
        run_smbo(bowl, unit_square, warmup=2, iters=-1, seed=0)


@pytest.mark.slow
def test_finds_bowl_minimum(unit_square):
    """Test that SMBO locates the minimum of a quadratic bowl."""
    hits = 0
    for seed in range(10):
        history = run_smbo(bowl, unit_square, warmup=10, iters=40, seed=seed, log_sink=lambda *_: None)
        best = history.best().decoded
        hits += max(abs(best["x"] - 0.7), abs(best["y"] - 0.3)) <= 0.05
    assert hits >= 9
