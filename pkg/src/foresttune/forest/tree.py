"""Single decision tree: bag drawing, growth and traversal."""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from foresttune.errors import InvalidParamsError
from foresttune.forest.params import HyperParams
from foresttune.forest.splitting import best_split
from foresttune.seeding import round_half_up

LEAF = -1


def bag_size(n: int, sample_fraction: float) -> int:
    """round(sample_fraction * n), halves rounded up."""
    return round_half_up(sample_fraction * n)


def draw_bag(
    n: int, sample_fraction: float, replace: bool, tree_rng: np.random.Generator
) -> np.ndarray:
    """
    Draw the in-bag multiset of one tree.

    Args:
        n: Number of training observations
        sample_fraction: Fraction of n to draw, in (0, 1]
        replace: Draw with replacement (bootstrap) or without (subsampling)
        tree_rng: The tree's generator

    Returns:
        Sorted array of in-bag indices (duplicates possible when replace=True)
    """
    if not 0.0 < sample_fraction <= 1.0:
        raise InvalidParamsError(f"sample_fraction must be in (0, 1], got {sample_fraction}")
    size = bag_size(n, sample_fraction)
    if size == 0:
        raise InvalidParamsError(
            f"sample_fraction {sample_fraction} draws no observations from n={n}"
        )
    if replace:
        bag = tree_rng.integers(0, n, size=size)
    else:
        bag = tree_rng.permutation(n)[:size]
    return np.sort(bag)


@dataclass
class Tree:
    """
    Flattened binary tree; both children are allocated when their parent splits.

    ``feature[i] == LEAF`` marks a leaf. Rows with ``x[feature] < threshold`` go
    to ``left``. ``value`` holds class counts (classification) or the mean
    target in column 0 (regression); ``n_samples`` the training count per node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature == LEAF

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of X."""
        node = np.zeros(len(X), dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            current = node[active]
            go_left = X[active, self.feature[current]] < self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def leaf_values(self, X: np.ndarray, classification: bool) -> np.ndarray:
        """Per-row leaf payload: class-frequency vectors or leaf means."""
        values = self.value[self.apply(X)]
        if classification:
            return values / values.sum(axis=1, keepdims=True)
        return values[:, 0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "Tree":
        return cls(
            feature=np.asarray(payload["feature"], dtype=np.int64),
            threshold=np.asarray(payload["threshold"], dtype=np.float64),
            left=np.asarray(payload["left"], dtype=np.int64),
            right=np.asarray(payload["right"], dtype=np.int64),
            value=np.asarray(payload["value"], dtype=np.float64),
            n_samples=np.asarray(payload["n_samples"], dtype=np.int64),
        )


class TreeGrower:
    """
    Grow one tree depth-first.

    A node is split when its size exceeds ``min_node_size``, the depth cap is
    not reached, and a positive-gain split exists among ``mtry`` candidate
    features drawn without replacement. Children may be smaller than
    ``min_node_size``.
    """

    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        params: HyperParams,
        rng: np.random.Generator,
        n_classes: Optional[int],
    ):
        self.X = X
        self.y = y
        self.params = params
        self.rng = rng
        self.n_classes = n_classes
        self._feature: List[int] = []
        self._threshold: List[float] = []
        self._left: List[int] = []
        self._right: List[int] = []
        self._value: List[np.ndarray] = []
        self._n_samples: List[int] = []

    def _payload(self, rows: np.ndarray) -> np.ndarray:
        if self.n_classes is not None:
            return np.bincount(self.y[rows], minlength=self.n_classes).astype(np.float64)
        return np.array([float(np.mean(self.y[rows]))])

    def _is_pure(self, rows: np.ndarray) -> bool:
        values = self.y[rows]
        return bool(np.all(values == values[0]))

    def _new_node(self, rows: np.ndarray) -> int:
        self._feature.append(LEAF)
        self._threshold.append(0.0)
        self._left.append(LEAF)
        self._right.append(LEAF)
        self._value.append(self._payload(rows))
        self._n_samples.append(len(rows))
        return len(self._feature) - 1

    def grow(self) -> Tree:
        p = self.X.shape[1]
        root_rows = np.arange(len(self.y))
        stack = [(self._new_node(root_rows), root_rows, 0)]

        while stack:
            node, rows, depth = stack.pop()
            if len(rows) <= self.params.min_node_size:
                continue
            if self.params.max_depth is not None and depth >= self.params.max_depth:
                continue
            if self._is_pure(rows):
                continue

            candidates = self.rng.choice(p, size=self.params.mtry, replace=False)
            split = best_split(
                self.X[rows],
                self.y[rows],
                candidates,
                self.params.split_rule,
                rng=self.rng,
                n_classes=self.n_classes,
            )
            if split is None:
                continue

            goes_left = self.X[rows, split.feature] < split.threshold
            left_rows, right_rows = rows[goes_left], rows[~goes_left]
            self._feature[node] = split.feature
            self._threshold[node] = split.threshold
            self._left[node] = self._new_node(left_rows)
            self._right[node] = self._new_node(right_rows)
            # right pushed first so the left subtree is expanded next
            stack.append((self._right[node], right_rows, depth + 1))
            stack.append((self._left[node], left_rows, depth + 1))

        return Tree(
            feature=np.asarray(self._feature, dtype=np.int64),
            threshold=np.asarray(self._threshold, dtype=np.float64),
            left=np.asarray(self._left, dtype=np.int64),
            right=np.asarray(self._right, dtype=np.int64),
            value=np.vstack(self._value),
            n_samples=np.asarray(self._n_samples, dtype=np.int64),
        )
