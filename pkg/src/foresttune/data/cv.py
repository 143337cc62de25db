"""Repeated (stratified) k-fold cross-validation plans."""

from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from foresttune.data.dataset import Dataset, Task
from foresttune.errors import DataError
from foresttune.seeding import generator


@dataclass(frozen=True)
class CvPlan:
    """Fold assignments: ``assignments[r, i]`` is the fold of row i in repetition r."""

    folds: int
    repetitions: int
    assignments: np.ndarray

    def split(self, repetition: int, fold: int) -> Tuple[np.ndarray, np.ndarray]:
        """Return (train indices, test indices) for one fold of one repetition."""
        row = self.assignments[repetition]
        return np.flatnonzero(row != fold), np.flatnonzero(row == fold)

    def iter_splits(self) -> Iterator[Tuple[int, int, np.ndarray, np.ndarray]]:
        for repetition in range(self.repetitions):
            for fold in range(self.folds):
                train_idx, test_idx = self.split(repetition, fold)
                yield repetition, fold, train_idx, test_idx


def make_cv_plan(dataset: Dataset, k: int, reps: int, seed: int) -> CvPlan:
    """
    Build a repeated k-fold plan, stratified by class for classification.

    Rows of each class are shuffled and dealt round-robin into folds; the deal
    continues across classes so fold sizes differ by at most one.

    Args:
        dataset: Dataset to split
        k: Number of folds
        reps: Number of repetitions
        seed: Seed; identical seeds give identical plans

    Returns:
        CvPlan
    """
    if k < 2:
        raise DataError(f"fold count must be at least 2, got {k}")
    if k > dataset.n:
        raise DataError(f"fold count {k} exceeds observation count {dataset.n}")
    if reps < 1:
        raise DataError(f"repetition count must be at least 1, got {reps}")

    n = dataset.n
    if dataset.task is Task.CLASSIFICATION:
        y = dataset.y
        groups = [np.flatnonzero(y == c) for c in range(dataset.n_classes)]
    else:
        groups = [np.arange(n)]

    assignments = np.empty((reps, n), dtype=np.int64)
    for repetition in range(reps):
        rng = generator(seed, repetition)
        offset = 0
        for group in groups:
            shuffled = rng.permutation(group)
            assignments[repetition, shuffled] = (offset + np.arange(len(shuffled))) % k
            offset += len(shuffled)

    return CvPlan(folds=k, repetitions=reps, assignments=assignments)
