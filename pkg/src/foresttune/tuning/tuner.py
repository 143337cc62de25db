"""Model-based tuning of mtry, sample fraction and node size on the OOB error."""

import math
import time
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from foresttune.config import config
from foresttune.data.dataset import Dataset
from foresttune.errors import NoOobObservationsError, SmboError, TunerError
from foresttune.forest.ensemble import Forest, train
from foresttune.forest.params import HyperParams, SplitRule
from foresttune.logging_utils import setup_logger
from foresttune.metrics.measures import Measure, tuning_measure
from foresttune.oob.curves import oob_measure
from foresttune.seeding import derive_seed, round_half_up
from foresttune.tuning.smbo import SmboHistory, run_smbo
from foresttune.tuning.space import DEFAULT_PARAMETERS, ParamKind, ParamSpace, default_space

logger = setup_logger(__name__)

# Share of best SMBO points averaged into the recommendation
RECOMMEND_FRACTION = 0.05
# Seconds added to the runtime estimate
TIME_OVERHEAD = 50.0


@dataclass
class TuneConfig:
    """Settings of one tuning run."""

    measure: Optional[Measure] = None
    num_trees: int = config.TUNE_NUM_TREES
    warmup: int = config.TUNE_WARMUP
    iters: int = config.TUNE_ITERS
    parameters: Tuple[str, ...] = DEFAULT_PARAMETERS
    workers: int = 1
    seed: int = config.RANDOM_SEED
    candidates: int = config.SMBO_CANDIDATES
    split_rule: Optional[SplitRule] = None

    def __post_init__(self):
        self.parameters = tuple(self.parameters)
        if self.warmup < 2:
            raise TunerError(f"warmup must be >= 2, got {self.warmup}")
        if self.iters < 0:
            raise TunerError(f"iters must be >= 0, got {self.iters}")
        if self.num_trees < 1:
            raise TunerError(f"num_trees must be >= 1, got {self.num_trees}")
        if not self.parameters:
            raise TunerError("no parameters to tune")

    @property
    def evaluations(self) -> int:
        return self.warmup + self.iters


@dataclass
class TuneResult:
    recommended: HyperParams
    history: SmboHistory
    model: Forest
    measure: Measure
    objective: float
    elapsed: float
    space: ParamSpace


def tuning_base(dataset: Dataset, cfg: TuneConfig) -> HyperParams:
    """
    Parameters shared by every tuning-time forest.

    Untuned parameters stay at the task defaults; when sample_fraction is
    tuned (and replace is not) forests subsample without replacement.
    """
    overrides: Dict[str, Any] = {"num_trees": cfg.num_trees}
    if cfg.split_rule is not None:
        overrides["split_rule"] = cfg.split_rule
    if "sample_fraction" in cfg.parameters and "replace" not in cfg.parameters:
        overrides["replace"] = False
    return HyperParams.for_dataset(dataset, **overrides)


def recommend_fragment(history: SmboHistory, space: ParamSpace) -> Dict[str, Any]:
    """
    Average the decoded parameters of the best 5% of the history.

    Integer parameters are rounded half-up, Booleans take the majority
    (ties to True), and every value is clamped into its range.
    """
    if len(history) == 0:
        raise TunerError("cannot recommend from an empty history")
    k = math.ceil(RECOMMEND_FRACTION * len(history))
    ranked = sorted(history.points, key=lambda point: (point.failed, point.objective, point.iteration))
    best = ranked[:k]

    fragment: Dict[str, Any] = {}
    for spec in space.specs:
        mean = float(np.mean([float(point.decoded[spec.name]) for point in best]))
        if spec.kind is ParamKind.BOOLEAN:
            fragment[spec.name] = mean >= 0.5
        elif spec.is_integer:
            fragment[spec.name] = spec.clamp(round_half_up(mean))
        else:
            fragment[spec.name] = spec.clamp(mean)
    return fragment


def recommend(
    history: SmboHistory, space: ParamSpace, base: Optional[HyperParams] = None
) -> HyperParams:
    """
    Recommended hyperparameters: the averaged best points merged into ``base``.

    Args:
        history: SMBO history
        space: The tuned space
        base: Parameters for untuned fields (task defaults when omitted)

    Returns:
        HyperParams
    """
    if base is None:
        if space.task is None or space.p is None:
            raise TunerError("recommend needs a base configuration for a task-free space")
        base = HyperParams.defaults(space.task, space.p)
    return base.with_updates(**recommend_fragment(history, space))


def tune(dataset: Dataset, cfg: Optional[TuneConfig] = None) -> TuneResult:
    """
    Tune a random forest on its OOB performance.

    Each evaluation trains a forest with the decoded parameters and a seed
    derived from (cfg.seed, iteration) and scores its OOB predictions. The
    recommended parameters then train the final model with cfg.seed.

    Args:
        dataset: Training data
        cfg: Tuning configuration

    Returns:
        TuneResult
    """
    cfg = cfg or TuneConfig()
    measure = cfg.measure or tuning_measure(dataset.task)
    measure.check(dataset.task, dataset.n_classes)
    space = default_space(dataset.task, dataset.n, dataset.p, cfg.parameters)
    base = tuning_base(dataset, cfg)

    logger.info(f"\n{'=' * 60}")
    logger.info(f"Tuning on {dataset.name}: {dataset.n:,} rows, {dataset.p} predictors")
    logger.info(f"{'=' * 60}")
    logger.info(f"Measure: {measure.name} ({measure.direction.value})")
    logger.info(f"Design: {cfg.warmup} warmup + {cfg.iters} iterations, {cfg.num_trees} trees")
    logger.info(f"Search space:\n{space.to_frame().to_string(index=False)}")

    def objective(fragment: Dict[str, Any], iteration: int) -> float:
        params = base.with_updates(**fragment)
        forest = train(dataset, params, derive_seed(cfg.seed, iteration), workers=cfg.workers)
        return measure.orient(oob_measure(forest, dataset, measure))

    start = time.perf_counter()
    try:
        history = run_smbo(
            objective, space, cfg.warmup, cfg.iters, cfg.seed, candidates=cfg.candidates
        )
    except SmboError as e:
        raise TunerError(f"tuning failed: {e}") from e
    recommended = recommend(history, space, base)
    recommended.validate(dataset)

    logger.info(f"Training final model: {recommended.describe()}")
    model = train(dataset, recommended, cfg.seed, workers=cfg.workers)
    try:
        value = oob_measure(model, dataset, measure)
    except NoOobObservationsError:
        logger.warning("Final model has no OOB observations; objective unavailable")
        value = float("nan")
    elapsed = time.perf_counter() - start

    return TuneResult(
        recommended=recommended,
        history=history,
        model=model,
        measure=measure,
        objective=value,
        elapsed=elapsed,
        space=space,
    )


def _time_default_training(dataset: Dataset, cfg: TuneConfig) -> float:
    params = HyperParams.for_dataset(dataset, num_trees=cfg.num_trees)
    start = time.perf_counter()
    train(dataset, params, cfg.seed, workers=cfg.workers)
    return time.perf_counter() - start


def estimate_time(dataset: Dataset, cfg: Optional[TuneConfig] = None) -> float:
    """
    Approximate tuning time: one default training times the evaluation count, plus 50 s.

    Args:
        dataset: Training data
        cfg: Tuning configuration

    Returns:
        Estimated seconds
    """
    cfg = cfg or TuneConfig()
    seconds = _time_default_training(dataset, cfg)
    logger.info(f"One training with {cfg.num_trees} trees took {seconds:.2f}s")
    return seconds * cfg.evaluations + TIME_OVERHEAD


def format_duration(seconds: float) -> str:
    """Render seconds as e.g. "1M 13S" or "1H 2M 3S"."""
    total = max(0, round_half_up(seconds))
    hours, rest = divmod(total, 3600)
    minutes, secs = divmod(rest, 60)
    parts = []
    if hours:
        parts.append(f"{hours}H")
    if hours or minutes:
        parts.append(f"{minutes}M")
    parts.append(f"{secs}S")
    return " ".join(parts)


def format_recommendation(result: TuneResult, parameters: Optional[Sequence[str]] = None) -> str:
    """
    Recommendation block: tuned settings, OOB result of the final model, model summary.

    Args:
        result: Tuning result
        parameters: Parameters to list (defaults to the tuned space)

    Returns:
        Multi-line text
    """
    names = list(parameters or result.space.names)
    recommended = result.recommended.to_dict()
    settings = pd.DataFrame([{name: recommended[name] for name in names}], index=[1])
    outcome = pd.DataFrame(
        [{result.measure.name: result.objective, "exec.time": round(result.elapsed, 2)}], index=[1]
    )
    return "\n".join([
        "Recommended parameter settings:",
        settings.to_string(),
        "Results:",
        outcome.to_string(),
        f"Model: {result.recommended.describe()}",
    ])
