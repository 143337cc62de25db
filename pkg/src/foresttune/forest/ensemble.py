"""Train and apply random forests."""

import time
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from foresttune.data.dataset import ColumnType, Dataset, Task
from foresttune.errors import SchemaMismatchError, TaskMismatchError
from foresttune.forest.params import HyperParams
from foresttune.forest.tree import Tree, TreeGrower, draw_bag
from foresttune.logging_utils import setup_logger
from foresttune.seeding import generator

logger = setup_logger(__name__)

Rows = Union[Dataset, pd.DataFrame]

# Rank given to a categorical level the forest never saw; always goes left.
UNSEEN_LEVEL_RANK = -np.inf


@dataclass
class Forest:
    """Trained ensemble with per-tree bags for out-of-bag evaluation."""

    trees: List[Tree]
    bags: List[np.ndarray]
    params: HyperParams
    master_seed: int
    task: Task
    classes: Tuple[str, ...]
    feature_names: List[str]
    column_types: Dict[str, ColumnType]
    target_name: str
    category_orders: Dict[str, List[str]]
    n_train: int

    @property
    def classification(self) -> bool:
        return self.task is Task.CLASSIFICATION

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def num_trees(self) -> int:
        return len(self.trees)

    def oob_mask(self, tree_index: int) -> np.ndarray:
        """Boolean mask of training rows left out of tree ``tree_index``'s bag."""
        mask = np.ones(self.n_train, dtype=bool)
        mask[self.bags[tree_index]] = False
        return mask


def category_orders(dataset: Dataset, respect_unordered_factors: bool = True) -> Dict[str, List[str]]:
    """
    Level order used for splitting each categorical feature.

    With ``respect_unordered_factors`` levels present in the data are sorted by
    their target mean: frequency of the second class for binary tasks, of the
    first class for multiclass tasks, mean response for regression. Ties keep
    first-appearance order. Otherwise all declared levels keep their order.

    Args:
        dataset: Training data
        respect_unordered_factors: Order levels by target mean

    Returns:
        Mapping of categorical column name to ordered level list
    """
    orders: Dict[str, List[str]] = {}
    y = dataset.y
    if dataset.task is Task.CLASSIFICATION:
        positive = 1 if dataset.n_classes == 2 else 0
        response = (y == positive).astype(np.float64)
    else:
        response = y

    for column, column_type in dataset.column_types.items():
        if not column_type.is_categorical:
            continue
        if not respect_unordered_factors:
            orders[column] = list(column_type.levels)
            continue
        codes = dataset.codes(column)
        scored = [
            (float(response[codes == code].mean()), level)
            for code, level in enumerate(column_type.levels)
            if np.any(codes == code)
        ]
        orders[column] = [level for _, level in sorted(scored, key=lambda item: item[0])]
    return orders


def encode_rows(
    rows: Rows,
    feature_names: List[str],
    column_types: Dict[str, ColumnType],
    orders: Dict[str, List[str]],
) -> np.ndarray:
    """
    Encode feature rows into a float matrix; categoricals become level ranks.

    Args:
        rows: Dataset or DataFrame holding at least the feature columns
        feature_names: Feature columns in training order
        column_types: Training schema
        orders: Level order per categorical feature

    Returns:
        Float64 matrix of shape (rows, features)
    """
    frame = rows.features if isinstance(rows, Dataset) else rows
    missing = [name for name in feature_names if name not in frame.columns]
    if missing:
        raise SchemaMismatchError(f"rows lack feature columns: {missing}")

    X = np.empty((len(frame), len(feature_names)), dtype=np.float64)
    for j, name in enumerate(feature_names):
        column = frame[name]
        if column_types[name].is_categorical:
            ranks = {level: float(rank) for rank, level in enumerate(orders[name])}
            X[:, j] = column.astype(str).map(ranks).fillna(UNSEEN_LEVEL_RANK).to_numpy()
        else:
            values = pd.to_numeric(column, errors="coerce")
            if values.isna().any():
                raise SchemaMismatchError(f"column '{name}' has non-numeric values")
            X[:, j] = values.to_numpy(dtype=np.float64)
    return X


def forest_matrix(forest: Forest, rows: Rows) -> np.ndarray:
    return encode_rows(rows, forest.feature_names, forest.column_types, forest.category_orders)


def _grow_one(
    X: np.ndarray,
    y: np.ndarray,
    params: HyperParams,
    n_classes: Optional[int],
    seed: int,
    tree_index: int,
) -> Tuple[Tree, np.ndarray]:
    rng = generator(seed, tree_index)
    bag = draw_bag(len(y), params.sample_fraction, params.replace, rng)
    tree = TreeGrower(X[bag], y[bag], params, rng, n_classes).grow()
    return tree, bag


def train(dataset: Dataset, params: HyperParams, seed: int, workers: int = 1) -> Forest:
    """
    Train a random forest.

    Tree t draws its bag, candidate features and cutpoints from the generator
    keyed by (seed, t) only, so the result does not depend on ``workers`` and
    the first T trees of a larger forest equal a T-tree forest.

    Args:
        dataset: Training data
        params: Hyperparameters (validated against the dataset)
        seed: Master seed
        workers: Number of parallel workers for tree growth

    Returns:
        Trained Forest
    """
    params.validate(dataset)
    orders = category_orders(dataset, params.respect_unordered_factors)
    X = encode_rows(dataset, dataset.feature_names, dataset.column_types, orders)
    y = dataset.y
    n_classes = dataset.n_classes if dataset.task is Task.CLASSIFICATION else None

    logger.debug(
        f"Training {params.num_trees} trees on {dataset.n:,} rows x {dataset.p} predictors "
        f"({workers} worker(s), seed {seed})"
    )
    start = time.perf_counter()
    grown = Parallel(n_jobs=max(1, min(workers, params.num_trees)))(
        delayed(_grow_one)(X, y, params, n_classes, seed, t) for t in range(params.num_trees)
    )
    logger.debug(f"Trained {len(grown)} trees in {time.perf_counter() - start:.2f}s")

    return Forest(
        trees=[tree for tree, _ in grown],
        bags=[bag for _, bag in grown],
        params=params,
        master_seed=int(seed),
        task=dataset.task,
        classes=dataset.classes,
        feature_names=dataset.feature_names,
        column_types=dict(dataset.column_types),
        target_name=dataset.target_name,
        category_orders=orders,
        n_train=dataset.n,
    )


def _mean_over_trees(forest: Forest, X: np.ndarray) -> np.ndarray:
    total = None
    for tree in forest.trees:
        values = tree.leaf_values(X, forest.classification)
        total = values.copy() if total is None else total + values
    return total / forest.num_trees


def _predict_mean(forest: Forest, X: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or len(X) < 2 * workers:
        return _mean_over_trees(forest, X)
    chunks = np.array_split(X, workers)
    parts = Parallel(n_jobs=workers)(delayed(_mean_over_trees)(forest, chunk) for chunk in chunks)
    return np.concatenate(parts, axis=0)


def predict_proba(forest: Forest, rows: Rows, workers: int = 1) -> np.ndarray:
    """
    Class probabilities: the mean over trees of leaf class-frequency vectors.

    Args:
        forest: Classification forest
        rows: Dataset or DataFrame with the feature columns
        workers: Parallel workers across rows

    Returns:
        Array of shape (rows, classes)
    """
    if not forest.classification:
        raise TaskMismatchError("predict_proba requires a classification forest")
    return _predict_mean(forest, forest_matrix(forest, rows), workers)


def predict(forest: Forest, rows: Rows, workers: int = 1) -> np.ndarray:
    """
    Class labels (argmax of probabilities, ties to the earlier class) or regression means.

    Args:
        forest: Trained forest
        rows: Dataset or DataFrame with the feature columns
        workers: Parallel workers across rows

    Returns:
        Array of labels (str) or floats
    """
    mean = _predict_mean(forest, forest_matrix(forest, rows), workers)
    if forest.classification:
        return np.asarray(forest.classes, dtype=object)[np.argmax(mean, axis=1)]
    return mean


@dataclass
class OobPredictions:
    """OOB aggregate per training row; NaN rows had no out-of-bag tree."""

    values: np.ndarray
    tree_counts: np.ndarray

    @property
    def covered(self) -> np.ndarray:
        return self.tree_counts > 0


def iter_oob_prefixes(forest: Forest, dataset: Dataset) -> Iterator[Tuple[int, OobPredictions]]:
    """
    Yield the OOB aggregate of the first t trees for t = 1..num_trees.

    Sums accumulate tree by tree in index order, so every consumer sees the
    same floating-point result for the same prefix.
    """
    if dataset.n != forest.n_train:
        raise SchemaMismatchError(
            f"forest was trained on {forest.n_train} rows, dataset has {dataset.n}"
        )
    X = forest_matrix(forest, dataset)
    width = (forest.n_classes,) if forest.classification else ()
    total = np.zeros((dataset.n,) + width, dtype=np.float64)
    counts = np.zeros(dataset.n, dtype=np.int64)

    for t, tree in enumerate(forest.trees):
        mask = forest.oob_mask(t)
        if mask.any():
            total[mask] += tree.leaf_values(X[mask], forest.classification)
            counts[mask] += 1
        with np.errstate(invalid="ignore", divide="ignore"):
            divisor = counts[:, None] if forest.classification else counts
            values = np.where(divisor > 0, total / np.maximum(divisor, 1), np.nan)
        yield t + 1, OobPredictions(values=values, tree_counts=counts.copy())


def oob_predictions(forest: Forest, dataset: Dataset) -> OobPredictions:
    """OOB aggregate over all trees."""
    result = None
    for _, result in iter_oob_prefixes(forest, dataset):
        pass
    return result


def oob_proba(forest: Forest, dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """
    OOB class probabilities and per-row OOB tree counts.

    Args:
        forest: Classification forest trained on ``dataset``
        dataset: The training dataset

    Returns:
        (probabilities with NaN rows for uncovered observations, OOB tree counts)
    """
    if not forest.classification:
        raise TaskMismatchError("oob_proba requires a classification forest")
    result = oob_predictions(forest, dataset)
    return result.values, result.tree_counts


def oob_predict(forest: Forest, dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """OOB regression means (NaN for uncovered rows) and per-row OOB tree counts."""
    if forest.classification:
        raise TaskMismatchError("oob_predict requires a regression forest")
    result = oob_predictions(forest, dataset)
    return result.values, result.tree_counts
