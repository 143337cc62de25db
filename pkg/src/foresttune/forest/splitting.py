"""Split criteria and the per-node split search."""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from foresttune.errors import ForestError, TaskMismatchError
from foresttune.forest.params import SplitKind, SplitRule

# Gains within this distance of the best gain are ties; a split needs more than this gain.
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float
    n_left: int
    n_right: int


def gini_impurity(class_counts: Iterable[float]) -> float:
    """1 - sum_k (n_k / n)^2 for a vector of class counts."""
    counts = np.asarray(list(class_counts), dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ForestError("gini impurity needs at least one observation")
    return float(1.0 - np.sum((counts / total) ** 2))


def sum_squared_deviations(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    return float(np.sum((values - values.mean()) ** 2))


def split_gain(
    x: np.ndarray,
    y: np.ndarray,
    cut: float,
    rule: SplitRule,
    n_classes: Optional[int] = None,
) -> Optional[float]:
    """
    Gain of sending ``x < cut`` left and the rest right.

    Classification (``n_classes`` given): parent Gini minus the size-weighted
    mean child Gini. Regression: parent sum of squared deviations minus the
    children's sums.

    Args:
        x: Feature values of the node's observations
        y: Class codes or regression targets of the node's observations
        cut: Threshold
        rule: Split rule (checked against the task)
        n_classes: Number of classes, None for regression

    Returns:
        The gain, or None if the cut leaves a child empty
    """
    _check_rule(rule, n_classes)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    left = x < cut
    n_left = int(left.sum())
    if n_left == 0 or n_left == len(x):
        return None

    if n_classes is not None:
        def counts(labels):
            return np.bincount(labels, minlength=n_classes)

        n = len(y)
        weighted = (
            n_left * gini_impurity(counts(y[left]))
            + (n - n_left) * gini_impurity(counts(y[~left]))
        ) / n
        return gini_impurity(counts(y)) - weighted

    return (
        sum_squared_deviations(y)
        - sum_squared_deviations(y[left])
        - sum_squared_deviations(y[~left])
    )


def _check_rule(rule: SplitRule, n_classes: Optional[int]) -> None:
    if rule.kind is SplitKind.GINI and n_classes is None:
        raise TaskMismatchError("gini split rule requires class labels")
    if rule.kind is SplitKind.VARIANCE and n_classes is not None:
        raise TaskMismatchError("variance split rule requires a regression target")


def _classification_gains(table: np.ndarray, total: np.ndarray, n_left: np.ndarray, m: int) -> np.ndarray:
    """
    Gini gains from cumulative one-hot class counts.

    ``table[i, ..., c]`` counts class c among the ``n_left[i]`` lowest rows;
    ``n_left`` broadcasts against ``table`` without its class axis.
    """
    right = total - table
    nl = n_left.astype(np.float64)
    nr = m - nl
    gini_left = 1.0 - np.sum((table / nl[..., None]) ** 2, axis=-1)
    gini_right = 1.0 - np.sum((right / nr[..., None]) ** 2, axis=-1)
    parent = 1.0 - np.sum((total / m) ** 2, axis=-1)
    return parent - (nl * gini_left + nr * gini_right) / m


def _regression_gains(
    cum_sum: np.ndarray, cum_sq: np.ndarray, total_sum, total_sq, n_left: np.ndarray, m: int
) -> np.ndarray:
    """Sum-of-squares gains from cumulative sums of centred targets."""
    nl = n_left.astype(np.float64)
    nr = m - nl
    sse_left = cum_sq - cum_sum * cum_sum / nl
    sse_right = (total_sq - cum_sq) - (total_sum - cum_sum) ** 2 / nr
    sse_parent = total_sq - total_sum * total_sum / m
    return sse_parent - sse_left - sse_right


def _midpoint(lo: float, hi: float) -> float:
    threshold = (lo + hi) / 2.0
    # adjacent floats can round the midpoint down onto lo
    return hi if threshold <= lo else threshold


def _gains(
    order: np.ndarray, y: np.ndarray, n_left: np.ndarray, m: int, n_classes: Optional[int]
) -> np.ndarray:
    """Gains of every cut given row orders (axis 0) and left-child sizes."""
    # sizes broadcast against the per-feature axis of a 2-D order
    sizes = n_left.reshape(-1, *([1] * (order.ndim - 1)))
    if n_classes is not None:
        onehot = np.zeros((m, n_classes), dtype=np.float64)
        onehot[np.arange(m), y] = 1.0
        table = np.cumsum(onehot[order], axis=0)
        return _classification_gains(table[n_left - 1], table[-1], sizes, m)

    centred = np.asarray(y, dtype=np.float64) - float(np.mean(y))
    ys = centred[order]
    cum_sum, cum_sq = np.cumsum(ys, axis=0), np.cumsum(ys * ys, axis=0)
    return _regression_gains(
        cum_sum[n_left - 1], cum_sq[n_left - 1], cum_sum[-1], cum_sq[-1], sizes, m
    )


def _best_exhaustive(
    X: np.ndarray, y: np.ndarray, features: np.ndarray, n_classes: Optional[int]
) -> Optional[Split]:
    """All candidates at once: one stable sort per column, gains as an (m - 1, k) array."""
    m = len(y)
    Xc = X[:, features]
    order = np.argsort(Xc, axis=0, kind="stable")
    xs = np.take_along_axis(Xc, order, axis=0)

    # row i of the gain table sends the i + 1 lowest rows left
    n_left = np.arange(1, m)
    gains = _gains(order, y, n_left, m, n_classes)
    gains = np.where(xs[1:] > xs[:-1], gains, -np.inf)

    best_gain = float(gains.max())
    if not best_gain > TIE_TOLERANCE:
        return None

    hits = gains >= best_gain - TIE_TOLERANCE
    column = int(np.flatnonzero(hits.any(axis=0))[0])
    row = int(np.flatnonzero(hits[:, column])[0])
    return Split(
        feature=int(features[column]),
        threshold=_midpoint(float(xs[row, column]), float(xs[row + 1, column])),
        gain=float(gains[row, column]),
        n_left=row + 1,
        n_right=m - row - 1,
    )


def _best_extra_random(
    X: np.ndarray,
    y: np.ndarray,
    features: np.ndarray,
    num_random_cuts: int,
    rng: np.random.Generator,
    n_classes: Optional[int],
) -> Optional[Split]:
    """Random cutpoints drawn per candidate feature, in feature order."""
    m = len(y)
    scanned: List[Tuple[int, np.ndarray, np.ndarray, np.ndarray]] = []
    for feature in features:
        x = X[:, feature]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        if xs[0] == xs[-1]:
            continue

        thresholds = np.sort(rng.uniform(xs[0], xs[-1], size=num_random_cuts))
        n_left = np.searchsorted(xs, thresholds, side="left")
        keep = (n_left > 0) & (n_left < m)
        thresholds, n_left = thresholds[keep], n_left[keep]
        if n_left.size == 0:
            continue
        scanned.append((int(feature), thresholds, _gains(order, y, n_left, m, n_classes), n_left))

    if not scanned:
        return None
    best_gain = max(float(gains.max()) for _, _, gains, _ in scanned)
    if best_gain <= TIE_TOLERANCE:
        return None

    for feature, thresholds, gains, n_left in scanned:
        hits = np.flatnonzero(gains >= best_gain - TIE_TOLERANCE)
        if hits.size:
            j = hits[0]
            return Split(
                feature=feature,
                threshold=float(thresholds[j]),
                gain=float(gains[j]),
                n_left=int(n_left[j]),
                n_right=int(m - n_left[j]),
            )
    return None


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidates: Iterable[int],
    rule: SplitRule,
    rng: Optional[np.random.Generator] = None,
    n_classes: Optional[int] = None,
) -> Optional[Split]:
    """
    Search the best split of a node over the candidate features.

    Exhaustive rules scan every midpoint between consecutive distinct values;
    EXTRA_RANDOM draws ``num_random_cuts`` uniform cutpoints in each feature's
    node-local (min, max). Among gains within TIE_TOLERANCE of the best, the
    lowest (feature index, threshold) wins.

    Args:
        X: Node rows (already category-ranked), shape (m, p)
        y: Class codes or regression targets, shape (m,)
        candidates: Candidate feature indices (mtry draw)
        rule: Split rule
        rng: Generator for EXTRA_RANDOM cutpoints
        n_classes: Number of classes, None for regression

    Returns:
        The chosen Split, or None if no cut has positive gain
    """
    _check_rule(rule, n_classes)
    if len(y) < 2:
        return None
    features = np.unique(np.fromiter((int(f) for f in candidates), dtype=np.int64))
    if features.size == 0:
        return None

    if rule.kind is SplitKind.EXTRA_RANDOM:
        if rng is None:
            raise ForestError("extremely randomized splits need a random generator")
        return _best_extra_random(X, y, features, rule.num_random_cuts, rng, n_classes)
    return _best_exhaustive(X, y, features, n_classes)
