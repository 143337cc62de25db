"""Performance measures used as tuning objectives and benchmark criteria."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np
from sklearn.metrics import accuracy_score, mean_squared_error, roc_auc_score

from foresttune.data.dataset import Task
from foresttune.errors import IncompatibleMeasureError, MetricError

LOGLOSS_EPS = 1e-15
PROBABILITY_TOLERANCE = 1e-6


class Direction(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass(frozen=True)
class Measure:
    """A named measure with its optimization direction and input requirements."""

    name: str
    direction: Direction
    needs_probabilities: bool
    task: Task
    binary_only: bool = False

    @property
    def maximize(self) -> bool:
        return self.direction is Direction.MAXIMIZE

    def orient(self, value: float) -> float:
        """Map a value onto the smaller-is-better scale."""
        return -value if self.maximize else value

    def check(self, task: Task, n_classes: Optional[int] = None) -> None:
        """Raise IncompatibleMeasureError unless the measure applies to ``task``."""
        if task is not self.task:
            raise IncompatibleMeasureError(
                f"measure '{self.name}' is not defined for {task.value} tasks"
            )
        if self.binary_only and n_classes != 2:
            raise IncompatibleMeasureError(
                f"measure '{self.name}' requires a binary task, got {n_classes} classes"
            )

    def is_compatible(self, task: Task, n_classes: Optional[int] = None) -> bool:
        try:
            self.check(task, n_classes)
        except IncompatibleMeasureError:
            return False
        return True


MMCE = Measure("mmce", Direction.MINIMIZE, False, Task.CLASSIFICATION)
AUC = Measure("auc", Direction.MAXIMIZE, True, Task.CLASSIFICATION, binary_only=True)
BRIER_BINARY = Measure("brier-binary", Direction.MINIMIZE, True, Task.CLASSIFICATION, binary_only=True)
BRIER_MULTICLASS = Measure("brier", Direction.MINIMIZE, True, Task.CLASSIFICATION)
LOGLOSS = Measure("logloss", Direction.MINIMIZE, True, Task.CLASSIFICATION)
MSE = Measure("mse", Direction.MINIMIZE, False, Task.REGRESSION)

MEASURES: Dict[str, Measure] = {
    m.name: m for m in (MMCE, AUC, BRIER_BINARY, BRIER_MULTICLASS, LOGLOSS, MSE)
}


def get_measure(name: str) -> Measure:
    """Look up a measure by its CLI name (``brier`` is the multiclass convention)."""
    try:
        return MEASURES[name.lower()]
    except KeyError:
        raise MetricError(
            f"unknown measure '{name}' (choose from {', '.join(MEASURES)})"
        ) from None


def tuning_measure(task: Task) -> Measure:
    """Default tuning objective: multiclass Brier score or MSE."""
    return BRIER_MULTICLASS if task is Task.CLASSIFICATION else MSE


def importance_measure(task: Task) -> Measure:
    """Default permutation-importance measure: MMCE or MSE."""
    return MMCE if task is Task.CLASSIFICATION else MSE


def _check_lengths(truth: np.ndarray, other: np.ndarray) -> None:
    if len(truth) == 0:
        raise MetricError("measure needs at least one observation")
    if len(truth) != len(other):
        raise MetricError(f"length mismatch: {len(truth)} truths vs {len(other)} predictions")


def _check_probabilities(truth: np.ndarray, proba: np.ndarray) -> np.ndarray:
    proba = np.asarray(proba, dtype=np.float64)
    if proba.ndim != 2:
        raise MetricError("probabilities must be a (rows, classes) matrix")
    _check_lengths(truth, proba)
    if not np.all(np.isfinite(proba)) or proba.min() < -PROBABILITY_TOLERANCE:
        raise MetricError("probabilities must be finite and non-negative")
    if np.any(np.abs(proba.sum(axis=1) - 1.0) > PROBABILITY_TOLERANCE):
        raise MetricError("probability rows must sum to 1")
    if truth.min() < 0 or truth.max() >= proba.shape[1]:
        raise MetricError("class codes outside the probability columns")
    return proba


def mmce(truth: np.ndarray, predicted: np.ndarray) -> float:
    """Mean misclassification error."""
    truth, predicted = np.asarray(truth), np.asarray(predicted)
    _check_lengths(truth, predicted)
    return float(1.0 - accuracy_score(truth, predicted))


def auc(truth: np.ndarray, scores: np.ndarray) -> float:
    """
    Area under the ROC curve for 0/1 labels (1 = positive class).

    Equals the probability that a random positive outscores a random negative,
    ties counted one half.
    """
    truth = np.asarray(truth)
    scores = np.asarray(scores, dtype=np.float64)
    _check_lengths(truth, scores)
    if len(np.unique(truth)) != 2:
        raise MetricError("AUC needs both classes present")
    return float(roc_auc_score(truth, scores))


def brier(truth: np.ndarray, proba: np.ndarray, convention: str = "multiclass") -> float:
    """
    Brier score of class-probability rows against class codes.

    Args:
        truth: Class codes
        proba: Probability rows, one column per class
        convention: "multiclass" sums squared errors over classes (range [0, 2]);
            "binary" uses the second-class column only (range [0, 1])

    Returns:
        Mean Brier score
    """
    truth = np.asarray(truth, dtype=np.int64)
    proba = _check_probabilities(truth, proba)
    onehot = np.zeros_like(proba)
    onehot[np.arange(len(truth)), truth] = 1.0

    if convention == "binary":
        if proba.shape[1] != 2:
            raise MetricError("binary Brier score needs exactly two classes")
        return float(np.mean((proba[:, 1] - onehot[:, 1]) ** 2))
    if convention == "multiclass":
        return float(np.mean(np.sum((proba - onehot) ** 2, axis=1)))
    raise MetricError(f"unknown Brier convention '{convention}'")


def logloss(truth: np.ndarray, proba: np.ndarray, eps: float = LOGLOSS_EPS) -> float:
    """Mean of -log(max(p_true, eps))."""
    truth = np.asarray(truth, dtype=np.int64)
    proba = _check_probabilities(truth, proba)
    p_true = proba[np.arange(len(truth)), truth]
    return float(np.mean(-np.log(np.maximum(p_true, eps))))


def mse(truth: np.ndarray, predicted: np.ndarray) -> float:
    truth = np.asarray(truth, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    _check_lengths(truth, predicted)
    return float(mean_squared_error(truth, predicted))


@dataclass(frozen=True)
class EvaluationResult:
    """Measure value over the rows that carried a prediction."""

    value: float
    n_used: int
    n_excluded: int


def labels_from_proba(proba: np.ndarray) -> np.ndarray:
    """Class codes by argmax; ties go to the earlier class."""
    return np.argmax(proba, axis=1)


def evaluate(
    measure: Measure,
    truth: np.ndarray,
    predictions: np.ndarray,
    task: Task,
    n_classes: Optional[int] = None,
) -> EvaluationResult:
    """
    Compute a measure, skipping rows without a prediction.

    For classification ``predictions`` is a probability matrix; a row holding
    NaN (an OOB row no tree covered) is excluded and counted. For regression
    it is a vector of predicted values with NaN for uncovered rows.

    Args:
        measure: Measure to compute
        truth: Class codes or regression targets
        predictions: Probability matrix or predicted values
        task: Task of the data
        n_classes: Number of classes (defaults to the probability columns)

    Returns:
        EvaluationResult with the value and used/excluded row counts
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    truth = np.asarray(truth)
    if task is Task.CLASSIFICATION:
        if predictions.ndim != 2:
            raise MetricError("classification measures need a probability matrix")
        n_classes = n_classes if n_classes is not None else predictions.shape[1]
        covered = ~np.isnan(predictions).any(axis=1)
    else:
        covered = ~np.isnan(predictions)
    measure.check(task, n_classes)

    n_used = int(covered.sum())
    if n_used == 0:
        raise MetricError("no rows carry a prediction")
    truth, predictions = truth[covered], predictions[covered]

    if measure == MMCE:
        value = mmce(truth, labels_from_proba(predictions))
    elif measure == AUC:
        value = auc(truth, predictions[:, 1])
    elif measure == BRIER_BINARY:
        value = brier(truth, predictions, convention="binary")
    elif measure == BRIER_MULTICLASS:
        value = brier(truth, predictions, convention="multiclass")
    elif measure == LOGLOSS:
        value = logloss(truth, predictions)
    else:
        value = mse(truth, predictions)

    return EvaluationResult(value=value, n_used=n_used, n_excluded=len(covered) - n_used)
