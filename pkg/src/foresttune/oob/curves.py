"""Out-of-bag performance estimates and convergence curves over the tree count."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

from foresttune.data.dataset import Dataset
from foresttune.errors import MetricError, NoOobObservationsError, OobError
from foresttune.forest.ensemble import Forest, iter_oob_prefixes, oob_predictions
from foresttune.logging_utils import setup_logger
from foresttune.metrics.measures import EvaluationResult, Measure, evaluate, tuning_measure

logger = setup_logger(__name__)


def oob_evaluation(forest: Forest, dataset: Dataset, measure: Optional[Measure] = None) -> EvaluationResult:
    """
    Evaluate the forest's OOB predictions on its training data.

    Args:
        forest: Forest trained on ``dataset``
        dataset: Training dataset
        measure: Measure (defaults to Brier score / MSE)

    Returns:
        EvaluationResult over the covered rows

    Raises:
        NoOobObservationsError: No row was left out of any tree's bag
    """
    measure = measure or tuning_measure(forest.task)
    measure.check(forest.task, forest.n_classes)
    result = oob_predictions(forest, dataset)
    if not result.covered.any():
        raise NoOobObservationsError(
            "no OOB observations: every row is in every tree's bag"
        )
    return evaluate(measure, dataset.y, result.values, forest.task, forest.n_classes)


def oob_measure(forest: Forest, dataset: Dataset, measure: Optional[Measure] = None) -> float:
    """OOB value of ``measure`` (see ``oob_evaluation``)."""
    return oob_evaluation(forest, dataset, measure).value


@dataclass
class OobCurve:
    """OOB measure values at increasing tree counts."""

    tree_counts: List[int]
    values: Dict[str, List[float]] = field(default_factory=dict)
    rows_used: List[int] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        """Long table with columns ntree, measure, value."""
        records = [
            {"ntree": t, "measure": name, "value": values[i]}
            for name, values in self.values.items()
            for i, t in enumerate(self.tree_counts)
        ]
        return pd.DataFrame(records, columns=["ntree", "measure", "value"])


def tree_grid(num_trees: int, step: int = 1) -> List[int]:
    """Tree counts step, 2*step, ... always ending at ``num_trees``."""
    if step < 1:
        raise OobError(f"grid step must be >= 1, got {step}")
    grid = list(range(step, num_trees + 1, step))
    if not grid or grid[-1] != num_trees:
        grid.append(num_trees)
    return grid


def oob_curve(
    forest: Forest,
    dataset: Dataset,
    measures: Sequence[Measure],
    grid: Sequence[int],
) -> OobCurve:
    """
    OOB measures of the first t trees for every t in ``grid``.

    Rows no tree among the first t leaves out are excluded at that t; a point
    with no covered row is NaN.

    Args:
        forest: Forest trained on ``dataset``
        dataset: Training dataset
        measures: Measures to track
        grid: Tree counts within [1, num_trees]

    Returns:
        OobCurve
    """
    if not grid:
        raise OobError("tree-count grid is empty")
    if not measures:
        raise OobError("no measures requested")
    counts = sorted(set(int(t) for t in grid))
    if counts[0] < 1 or counts[-1] > forest.num_trees:
        raise OobError(f"grid must lie within [1, {forest.num_trees}], got {counts[0]}..{counts[-1]}")
    for measure in measures:
        measure.check(forest.task, forest.n_classes)

    wanted = set(counts)
    curve = OobCurve(tree_counts=counts, values={m.name: [] for m in measures})
    y = dataset.y
    for t, prefix in iter_oob_prefixes(forest, dataset):
        if t not in wanted:
            continue
        curve.rows_used.append(int(prefix.covered.sum()))
        for measure in measures:
            if not prefix.covered.any():
                value = float("nan")
            else:
                try:
                    value = evaluate(measure, y, prefix.values, forest.task, forest.n_classes).value
                except MetricError as e:
                    logger.warning(f"{measure.name} undefined at {t} trees: {e}")
                    value = float("nan")
            curve.values[measure.name].append(value)
        if t == counts[-1]:
            break

    logger.info(
        f"OOB curve over {len(counts)} tree counts; final "
        + ", ".join(f"{name}={values[-1]:.4f}" for name, values in curve.values.items())
    )
    return curve

