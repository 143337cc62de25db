"""Permutation variable importance on per-tree OOB sets, and its stability across seeds."""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import spearmanr

from foresttune.data.dataset import Dataset, Task
from foresttune.errors import MetricError, OobError
from foresttune.forest.ensemble import Forest, forest_matrix, train
from foresttune.forest.params import HyperParams
from foresttune.forest.tree import Tree
from foresttune.logging_utils import setup_logger
from foresttune.metrics.measures import Measure, evaluate, importance_measure
from foresttune.seeding import generator

logger = setup_logger(__name__)


@dataclass
class ImportanceReport:
    """Mean importance and its standard error per predictor."""

    features: List[str]
    importance: np.ndarray
    se: np.ndarray
    measure: str
    contributions: int

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "feature": self.features,
            "importance": self.importance,
            "se": self.se,
        })

    def ranking(self) -> List[str]:
        """Features from most to least important."""
        order = np.argsort(-self.importance, kind="stable")
        return [self.features[j] for j in order]


def _tree_score(
    tree: Tree, X: np.ndarray, y: np.ndarray, measure: Measure, task: Task, n_classes: int
) -> float:
    values = tree.leaf_values(X, task is Task.CLASSIFICATION)
    return measure.orient(evaluate(measure, y, values, task, n_classes).value)


def _tree_contributions(
    tree: Tree,
    tree_index: int,
    X_oob: np.ndarray,
    y_oob: np.ndarray,
    measure: Measure,
    task: Task,
    n_classes: int,
    repetitions: int,
    seed: int,
) -> Optional[np.ndarray]:
    """
    Oriented score increase per (repetition, feature) for one tree.

    Returns None when the tree has no OOB rows or the measure is undefined on them.
    """
    if len(y_oob) == 0:
        return None
    try:
        baseline = _tree_score(tree, X_oob, y_oob, measure, task, n_classes)
    except MetricError:
        return None

    p = X_oob.shape[1]
    out = np.empty((repetitions, p), dtype=np.float64)
    permuted = X_oob.copy()
    for r in range(repetitions):
        rng = generator(seed, tree_index, r)
        for j in range(p):
            permuted[:, j] = X_oob[rng.permutation(len(y_oob)), j]
            out[r, j] = _tree_score(tree, permuted, y_oob, measure, task, n_classes) - baseline
            permuted[:, j] = X_oob[:, j]
    return out


def permutation_importance(
    forest: Forest,
    dataset: Dataset,
    measure: Optional[Measure] = None,
    repetitions: int = 1,
    seed: int = 0,
    workers: int = 1,
) -> ImportanceReport:
    """
    Permutation importance averaged over trees and repetitions.

    For each tree, every column is permuted within the tree's OOB rows and
    the change of the tree's OOB measure is recorded, oriented so that a
    positive value means the feature matters. Trees without OOB rows are
    skipped.

    Args:
        forest: Forest trained on ``dataset``
        dataset: Training dataset
        measure: Measure (defaults to MMCE / MSE)
        repetitions: Permutations per tree and feature
        seed: Permutation seed
        workers: Parallel workers across trees

    Returns:
        ImportanceReport
    """
    if repetitions < 1:
        raise OobError(f"repetitions must be >= 1, got {repetitions}")
    if dataset.n != forest.n_train:
        raise OobError(f"forest was trained on {forest.n_train} rows, dataset has {dataset.n}")
    measure = measure or importance_measure(forest.task)
    measure.check(forest.task, forest.n_classes)

    X = forest_matrix(forest, dataset)
    y = dataset.y
    logger.info(
        f"Permutation importance ({measure.name}) over {forest.num_trees} trees, "
        f"{repetitions} repetition(s)"
    )

    masks = [forest.oob_mask(t) for t in range(forest.num_trees)]
    per_tree = Parallel(n_jobs=max(1, workers))(
        delayed(_tree_contributions)(
            tree, t, X[masks[t]], y[masks[t]], measure, forest.task,
            forest.n_classes, repetitions, seed,
        )
        for t, tree in enumerate(forest.trees)
    )
    blocks = [block for block in per_tree if block is not None]
    if not blocks:
        raise OobError("no tree has OOB rows on which the measure is defined")

    contributions = np.vstack(blocks)
    count = contributions.shape[0]
    importance = contributions.mean(axis=0)
    if count > 1:
        se = contributions.std(axis=0, ddof=1) / np.sqrt(count)
    else:
        se = np.full(dataset.p, np.nan)

    return ImportanceReport(
        features=forest.feature_names,
        importance=importance,
        se=se,
        measure=measure.name,
        contributions=count,
    )


def importance_stability(
    dataset: Dataset,
    params: HyperParams,
    forests: int,
    seed: int,
    measure: Optional[Measure] = None,
    repetitions: int = 1,
    workers: int = 1,
    seeds: Optional[Sequence[int]] = None,
) -> pd.DataFrame:
    """
    Pairwise Spearman correlation of importance rankings across forests.

    Forest i is trained with seed ``seed + i`` unless ``seeds`` lists the
    seeds explicitly.

    Args:
        dataset: Training dataset
        params: Hyperparameters of every forest
        forests: Number of forests (>= 2)
        seed: Base seed
        measure: Importance measure
        repetitions: Permutations per tree and feature
        workers: Parallel workers
        seeds: Explicit per-forest seeds

    Returns:
        Symmetric correlation matrix (unit diagonal) indexed by forest seed
    """
    if dataset.p < 2:
        raise OobError("importance stability needs at least 2 features")
    seeds = list(seeds) if seeds is not None else [seed + i for i in range(forests)]
    if len(seeds) < 2:
        raise OobError(f"importance stability needs at least 2 forests, got {len(seeds)}")

    vectors = []
    for forest_seed in seeds:
        forest = train(dataset, params, forest_seed, workers=workers)
        report = permutation_importance(
            forest, dataset, measure, repetitions=repetitions, seed=forest_seed, workers=workers
        )
        vectors.append(report.importance)

    m = len(seeds)
    matrix = np.eye(m)
    for a in range(m):
        for b in range(a + 1, m):
            rho = spearmanr(vectors[a], vectors[b])[0]
            matrix[a, b] = matrix[b, a] = rho

    off_diagonal = matrix[~np.eye(m, dtype=bool)]
    logger.info(
        f"Importance rank stability over {m} forests of {params.num_trees} trees: "
        f"mean Spearman {np.nanmean(off_diagonal):.3f}"
    )
    labels = [f"seed_{s}" for s in seeds]
    return pd.DataFrame(matrix, index=labels, columns=labels)
