"""Sequential model-based optimization with a random-forest surrogate and expected improvement."""

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.stats import norm

from foresttune.config import config
from foresttune.data.dataset import ColumnType, Dataset, Task
from foresttune.errors import SmboError
from foresttune.forest.ensemble import Forest, train
from foresttune.forest.params import HyperParams, SplitKind, SplitRule
from foresttune.logging_utils import setup_logger
from foresttune.seeding import derive_seed, generator
from foresttune.tuning.space import ParamSpace, decode, sample_uniform

logger = setup_logger(__name__)

# Surrogate forest settings
SURROGATE_TREES = 100
SURROGATE_MIN_NODE_SIZE = 3

Objective = Callable[[Dict[str, Any], int], float]


@dataclass
class DesignPoint:
    """One evaluated configuration; ``objective`` is oriented (smaller is better)."""

    iteration: int
    point: np.ndarray
    decoded: Dict[str, Any]
    objective: float
    wall_time: float
    failed: bool = False
    phase: str = "warmup"


@dataclass
class SmboHistory:
    points: List[DesignPoint]
    space: ParamSpace
    warmup: int
    iters: int
    candidates: int
    seed: int

    def __len__(self) -> int:
        return len(self.points)

    @property
    def failures(self) -> int:
        return sum(point.failed for point in self.points)

    def objectives(self) -> np.ndarray:
        return np.array([point.objective for point in self.points], dtype=np.float64)

    def best(self) -> DesignPoint:
        """Successful point with the lowest objective (earliest on ties)."""
        successes = [point for point in self.points if not point.failed]
        if not successes:
            raise SmboError("history holds no successful evaluation")
        return min(successes, key=lambda point: point.objective)

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.objectives())

    def to_frame(self) -> pd.DataFrame:
        """Iteration, decoded parameters, objective, cumulative best and wall time per row."""
        frame = pd.DataFrame([
            {"iteration": point.iteration, "phase": point.phase, **point.decoded}
            for point in self.points
        ])
        frame["objective"] = self.objectives()
        frame["best_so_far"] = self.best_so_far()
        frame["failed"] = [point.failed for point in self.points]
        frame["wall_time"] = [point.wall_time for point in self.points]
        return frame


@dataclass
class SurrogateModel:
    """Regression forest over unit-cube coordinates."""

    forest: Forest
    dimension: int

    def tree_predictions(self, points: np.ndarray) -> np.ndarray:
        """Per-tree predictions, shape (trees, points)."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.vstack([tree.leaf_values(points, False) for tree in self.forest.trees])


def fit_surrogate(design: List[DesignPoint], seed: int) -> SurrogateModel:
    """
    Fit the surrogate on all design points: 100 trees, mtry = d, min node
    size 3, bootstrap samples of size n.

    Args:
        design: Evaluated design points (at least 2)
        seed: Surrogate training seed

    Returns:
        SurrogateModel
    """
    if len(design) < 2:
        raise SmboError(f"surrogate needs at least 2 design points, got {len(design)}")
    objectives = np.array([point.objective for point in design], dtype=np.float64)
    if not np.all(np.isfinite(objectives)):
        raise SmboError("surrogate objectives must be finite")

    X = np.vstack([point.point for point in design])
    d = X.shape[1]
    columns = [f"x{j + 1}" for j in range(d)]
    frame = pd.DataFrame(X, columns=columns)
    frame["objective"] = objectives
    dataset = Dataset.from_frame(
        name="surrogate",
        frame=frame,
        target="objective",
        column_types={column: ColumnType.numeric() for column in columns},
        task=Task.REGRESSION,
    )
    params = HyperParams(
        mtry=d,
        sample_fraction=1.0,
        replace=True,
        min_node_size=SURROGATE_MIN_NODE_SIZE,
        num_trees=SURROGATE_TREES,
        split_rule=SplitRule(SplitKind.VARIANCE),
    )
    return SurrogateModel(forest=train(dataset, params, seed, workers=1), dimension=d)


def surrogate_mean_sd(model: SurrogateModel, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and sample standard deviation of the per-tree predictions."""
    per_tree = model.tree_predictions(points)
    return per_tree.mean(axis=0), per_tree.std(axis=0, ddof=1)


def expected_improvement(
    mean: Union[float, np.ndarray],
    sd: Union[float, np.ndarray],
    best: float,
) -> Union[float, np.ndarray]:
    """
    Expected improvement over ``best`` for minimization.

    (best - mean) * Phi(z) + sd * phi(z) with z = (best - mean) / sd, and
    max(best - mean, 0) where sd = 0.
    """
    mean = np.asarray(mean, dtype=np.float64)
    sd = np.asarray(sd, dtype=np.float64)
    improvement = best - mean
    positive = sd > 0
    safe_sd = np.where(positive, sd, 1.0)
    z = improvement / safe_sd
    ei = np.where(
        positive,
        improvement * norm.cdf(z) + safe_sd * norm.pdf(z),
        np.maximum(improvement, 0.0),
    )
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def propose(
    model: SurrogateModel,
    best_so_far: float,
    candidates: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Draw ``candidates`` uniform points and return the one with the largest EI.

    Ties go to the lower surrogate mean, then to the earlier draw.
    """
    if candidates < 1:
        raise SmboError(f"candidate count must be >= 1, got {candidates}")
    points = rng.random((candidates, model.dimension))
    mean, sd = surrogate_mean_sd(model, points)
    ei = expected_improvement(mean, sd, best_so_far)
    order = np.lexsort((np.arange(candidates), mean, -np.atleast_1d(ei)))
    return points[order[0]]


def _format_fragment(fragment: Dict[str, Any]) -> str:
    return ", ".join(
        f"{name}={value:.4g}" if isinstance(value, float) else f"{name}={value}"
        for name, value in fragment.items()
    )


def _log_point(point: DesignPoint, best: float) -> None:
    status = " (failed, imputed)" if point.failed else ""
    logger.info(
        f"[{point.iteration:3d}] {_format_fragment(point.decoded)} -> "
        f"{point.objective:.6g}{status}, best {best:.6g}"
    )


def _evaluate(
    objective: Objective, space: ParamSpace, point: np.ndarray, iteration: int
) -> Tuple[Dict[str, Any], Optional[float], float]:
    fragment = decode(space, point)
    start = time.perf_counter()
    try:
        value = float(objective(fragment, iteration))
        if not math.isfinite(value):
            logger.warning(f"Evaluation {iteration} returned non-finite objective {value}")
            value = None
    except Exception as e:
        logger.warning(f"Evaluation {iteration} failed: {e}")
        value = None
    return fragment, value, time.perf_counter() - start


@dataclass
class _Loop:
    """Mutable state of one SMBO run."""

    points: List[DesignPoint] = field(default_factory=list)
    successes: List[float] = field(default_factory=list)

    @property
    def worst(self) -> float:
        return max(self.successes)

    @property
    def best(self) -> float:
        return min(point.objective for point in self.points)


def run_smbo(
    objective: Objective,
    space: ParamSpace,
    warmup: int,
    iters: int,
    seed: int,
    log_sink: Optional[Callable[[DesignPoint, float], None]] = None,
    candidates: Optional[int] = None,
) -> SmboHistory:
    """
    Minimize ``objective`` over ``space``.

    ``warmup`` uniform points are evaluated first, then each of ``iters``
    steps fits the surrogate on all points so far, proposes the EI maximizer
    and evaluates it. A failed evaluation (exception or non-finite value) is
    recorded with the worst successful objective so far.

    Args:
        objective: Callback (decoded fragment, iteration) -> oriented objective
        space: Search space
        warmup: Initial design size (>= 2)
        iters: Guided iterations (>= 0)
        seed: Seed of the design, surrogates and candidate draws
        log_sink: Called with every new point and the running best
        candidates: Random candidates per proposal

    Returns:
        SmboHistory of warmup + iters points
    """
    if warmup < 2:
        raise SmboError(f"warmup must be >= 2, got {warmup}")
    if iters < 0:
        raise SmboError(f"iters must be >= 0, got {iters}")
    candidates = config.SMBO_CANDIDATES if candidates is None else candidates
    log_sink = log_sink or _log_point
    rng = generator(seed)
    loop = _Loop()

    pending = []
    for iteration, point in enumerate(sample_uniform(space, warmup, rng)):
        fragment, value, wall = _evaluate(objective, space, point, iteration)
        pending.append((iteration, point, fragment, value, wall))
        if value is not None:
            loop.successes.append(value)
    if not loop.successes:
        raise SmboError(f"objective failed on all {warmup} warmup points")

    for iteration, point, fragment, value, wall in pending:
        loop.points.append(DesignPoint(
            iteration=iteration,
            point=point,
            decoded=fragment,
            objective=loop.worst if value is None else value,
            wall_time=wall,
            failed=value is None,
        ))
        log_sink(loop.points[-1], loop.best)

    for step in range(iters):
        iteration = warmup + step
        model = fit_surrogate(loop.points, derive_seed(seed, iteration))
        point = propose(model, loop.best, candidates, rng)
        fragment, value, wall = _evaluate(objective, space, point, iteration)
        if value is not None:
            loop.successes.append(value)
        loop.points.append(DesignPoint(
            iteration=iteration,
            point=point,
            decoded=fragment,
            objective=loop.worst if value is None else value,
            wall_time=wall,
            failed=value is None,
            phase="smbo",
        ))
        log_sink(loop.points[-1], loop.best)

    history = SmboHistory(
        points=loop.points,
        space=space,
        warmup=warmup,
        iters=iters,
        candidates=candidates,
        seed=seed,
    )
    if history.failures:
        logger.warning(f"{history.failures} of {len(history)} evaluations failed")
    return history
