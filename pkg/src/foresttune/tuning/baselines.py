"""Baseline tuners: mtry walk, three-point mtry grid with bootstrap holdout, random search."""

import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from foresttune.data.dataset import Dataset, Task
from foresttune.errors import ForestTuneError, TunerError
from foresttune.forest.ensemble import predict, train
from foresttune.forest.params import HyperParams
from foresttune.logging_utils import setup_logger
from foresttune.metrics.measures import Measure, importance_measure, mmce, mse, tuning_measure
from foresttune.oob.curves import oob_measure
from foresttune.seeding import derive_seed, generator, round_half_up
from foresttune.tuning.space import DEFAULT_PARAMETERS, decode, default_space, sample_uniform
from foresttune.tuning.tuner import TuneConfig, tuning_base

logger = setup_logger(__name__)

BASELINE_NUM_TREES = 500


def mtry_walk_path(
    error_at: Callable[[int], float],
    start: int,
    p: int,
    step_factor: float = 2.0,
    improve: float = 0.05,
) -> List[Tuple[int, float]]:
    """
    Evaluation sequence of the mtry walk.

    From ``start`` the walk divides mtry by ``step_factor`` (floor, at least 1)
    while each step improves the error by a relative ``improve`` or more; it
    then restarts from ``start`` multiplying (ceil, at most p).

    Args:
        error_at: mtry -> error (smaller is better)
        start: Starting mtry
        p: Number of predictors
        step_factor: Multiplicative step (> 1)
        improve: Minimal relative improvement to keep walking

    Returns:
        (mtry, error) pairs in evaluation order, start first
    """
    if step_factor <= 1.0:
        raise TunerError(f"step_factor must be > 1, got {step_factor}")
    start_error = error_at(start)
    path = [(start, start_error)]

    for step in (
        lambda m: max(1, math.floor(m / step_factor)),
        lambda m: min(p, math.ceil(m * step_factor)),
    ):
        current, current_error = start, start_error
        while True:
            candidate = step(current)
            if candidate == current:
                break
            error = error_at(candidate)
            path.append((candidate, error))
            gain = (current_error - error) / abs(current_error) if current_error != 0 else 0.0
            if gain < improve:
                break
            current, current_error = candidate, error
    return path


def tune_mtry_walk(
    dataset: Dataset,
    step_factor: float = 2.0,
    improve: float = 0.05,
    num_trees: int = BASELINE_NUM_TREES,
    seed: int = 0,
    measure: Optional[Measure] = None,
    workers: int = 1,
) -> HyperParams:
    """
    Walk mtry down and up from its default on the OOB error.

    Args:
        dataset: Training data
        step_factor: Multiplicative step
        improve: Minimal relative OOB improvement to continue
        num_trees: Trees per evaluated forest
        seed: Forest seed (shared by every evaluation)
        measure: OOB measure (defaults to MMCE / MSE)
        workers: Parallel workers

    Returns:
        Default parameters with the best evaluated mtry
    """
    measure = measure or importance_measure(dataset.task)
    measure.check(dataset.task, dataset.n_classes)
    base = HyperParams.for_dataset(dataset, num_trees=num_trees)

    def error_at(mtry: int) -> float:
        forest = train(dataset, base.with_updates(mtry=mtry), seed, workers=workers)
        error = measure.orient(oob_measure(forest, dataset, measure))
        logger.info(f"mtry={mtry}: OOB {measure.name} {measure.orient(error):.4f}")
        return error

    path = mtry_walk_path(error_at, base.mtry, dataset.p, step_factor, improve)
    best_mtry, _ = min(path, key=lambda item: item[1])
    logger.info(f"mtry walk evaluated {[m for m, _ in path]}, chose {best_mtry}")
    return base.with_updates(mtry=best_mtry)


def caret_candidates(p: int) -> List[int]:
    """{1, round((1 + p) / 2), p}, sorted and deduplicated."""
    return sorted({1, round_half_up((1 + p) / 2), p})


def tune_grid_caret(
    dataset: Dataset,
    bootstrap_iters: int = 25,
    num_trees: int = BASELINE_NUM_TREES,
    seed: int = 0,
    workers: int = 1,
) -> HyperParams:
    """
    Three-point mtry grid scored by bootstrap holdout error.

    Every candidate is trained on the same ``bootstrap_iters`` bootstrap
    samples and scored on the rows each sample left out: error rate for
    classification, MSE for regression. Ties go to the smaller mtry.

    Args:
        dataset: Training data
        bootstrap_iters: Number of bootstrap resamples
        num_trees: Trees per forest
        seed: Resampling and forest seed
        workers: Parallel workers

    Returns:
        Default parameters with the winning mtry
    """
    if dataset.p < 2:
        raise TunerError(f"mtry grid needs at least 2 predictors, got {dataset.p}")
    if bootstrap_iters < 1:
        raise TunerError(f"bootstrap_iters must be >= 1, got {bootstrap_iters}")

    resamples = []
    for b in range(bootstrap_iters):
        bag = generator(seed, b).integers(0, dataset.n, size=dataset.n)
        holdout = np.setdiff1d(np.arange(dataset.n), bag)
        if holdout.size:
            resamples.append((b, dataset.take(bag), dataset.take(holdout)))
    if not resamples:
        raise TunerError("no bootstrap resample left rows out")

    base = HyperParams.for_dataset(dataset, num_trees=num_trees)
    best_mtry, best_score = None, math.inf
    for mtry in caret_candidates(dataset.p):
        params = base.with_updates(mtry=mtry)
        scores = []
        for b, train_set, test_set in resamples:
            forest = train(train_set, params, derive_seed(seed, b), workers=workers)
            predictions = predict(forest, test_set)
            if dataset.task is Task.CLASSIFICATION:
                scores.append(mmce(test_set.target.astype(str).to_numpy(), predictions.astype(str)))
            else:
                scores.append(mse(test_set.y, predictions))
        score = float(np.mean(scores))
        logger.info(f"mtry={mtry}: bootstrap holdout error {score:.4f}")
        if score < best_score:
            best_mtry, best_score = mtry, score

    return base.with_updates(mtry=best_mtry)


def tune_random(
    dataset: Dataset,
    points: int,
    measure: Optional[Measure] = None,
    num_trees: int = BASELINE_NUM_TREES,
    seed: int = 0,
    workers: int = 1,
) -> HyperParams:
    """
    Random search over the default space, scored by the OOB measure.

    Args:
        dataset: Training data
        points: Number of random configurations
        measure: Tuning measure (defaults to Brier score / MSE)
        num_trees: Trees per forest
        seed: Sampling and forest seed
        workers: Parallel workers

    Returns:
        The best sampled configuration
    """
    if points < 1:
        raise TunerError(f"points must be >= 1, got {points}")
    measure = measure or tuning_measure(dataset.task)
    measure.check(dataset.task, dataset.n_classes)
    space = default_space(dataset.task, dataset.n, dataset.p, DEFAULT_PARAMETERS)
    base = tuning_base(
        dataset, TuneConfig(measure=measure, num_trees=num_trees, seed=seed, workers=workers)
    )

    best_params, best_value = None, math.inf
    for i, point in enumerate(sample_uniform(space, points, generator(seed))):
        params = base.with_updates(**decode(space, point))
        try:
            forest = train(dataset, params, derive_seed(seed, i), workers=workers)
            value = measure.orient(oob_measure(forest, dataset, measure))
        except ForestTuneError as e:
            logger.warning(f"Random point {i} failed: {e}")
            continue
        if value < best_value:
            best_params, best_value = params, value

    if best_params is None:
        raise TunerError(f"all {points} random configurations failed")
    logger.info(f"Random search best: {best_params.describe()} ({measure.name} {measure.orient(best_value):.4f})")
    return best_params
