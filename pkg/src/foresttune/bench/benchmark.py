"""Repeated cross-validation benchmark with failure imputation and rank aggregation."""

import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
import yaml
from joblib import Parallel, delayed
from scipy.stats import rankdata

import foresttune
from foresttune.bench.methods import Method
from foresttune.data.cv import make_cv_plan
from foresttune.data.dataset import Dataset, Task
from foresttune.errors import BenchError
from foresttune.forest.ensemble import predict, predict_proba
from foresttune.logging_utils import setup_logger
from foresttune.metrics.measures import Measure, evaluate
from foresttune.seeding import RNG_SCHEME, derive_seed

logger = setup_logger(__name__)

# A method failing on more folds than this gets the worst competing value
FAILURE_THRESHOLD = 0.20

FOLD_COLUMNS = [
    "dataset", "method", "repetition", "fold", "measure", "value", "failed", "train_time",
]


@dataclass
class BenchResult:
    """
    Per-fold records and the per-(dataset, method, measure) cells.

    ``cells`` holds the mean over successful folds until ``impute_failures``
    fills the cells of failing methods.
    """

    folds: pd.DataFrame
    cells: pd.DataFrame
    measures: List[Measure]
    methods: List[str]
    datasets: List[str]
    seed: int
    cv_folds: int
    repetitions: int
    imputed: bool = False

    @property
    def failures(self) -> pd.DataFrame:
        """Failed-fold fraction per (dataset, method, measure)."""
        return (
            self.folds.groupby(["dataset", "method", "measure"], sort=False)["failed"]
            .mean()
            .rename("failure_fraction")
            .reset_index()
        )

    @property
    def runtimes(self) -> pd.DataFrame:
        """Mean training wall time per (dataset, method)."""
        fits = self.folds.drop_duplicates(["dataset", "method", "repetition", "fold"])
        return (
            fits.groupby(["dataset", "method"], sort=False)["train_time"]
            .mean()
            .reset_index()
        )

    def measure(self, name: str) -> Measure:
        return next(m for m in self.measures if m.name == name)


def _score(forest, test: Dataset, measure: Measure) -> float:
    if test.task is Task.CLASSIFICATION:
        predictions = predict_proba(forest, test)
    else:
        predictions = predict(forest, test)
    return evaluate(measure, test.y, predictions, test.task, test.n_classes).value


def _run_fold(
    dataset: Dataset,
    method: Method,
    repetition: int,
    fold: int,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    measures: Sequence[Measure],
    seed: int,
    workers: int,
) -> List[Dict[str, Any]]:
    base = {"dataset": dataset.name, "method": method.name, "repetition": repetition, "fold": fold}
    start = time.perf_counter()
    try:
        forest = method.fit(dataset.take(train_idx), seed, workers)
    except Exception as e:
        logger.warning(f"{method.name} failed on {dataset.name} rep {repetition} fold {fold}: {e}")
        elapsed = time.perf_counter() - start
        return [
            {**base, "measure": m.name, "value": np.nan, "failed": True, "train_time": elapsed}
            for m in measures
        ]
    elapsed = time.perf_counter() - start

    test = dataset.take(test_idx)
    records = []
    for measure in measures:
        try:
            value, failed = _score(forest, test, measure), False
        except Exception as e:
            logger.warning(f"{measure.name} undefined for {method.name} on {dataset.name} fold {fold}: {e}")
            value, failed = np.nan, True
        records.append({**base, "measure": measure.name, "value": value, "failed": failed, "train_time": elapsed})
    return records


def _cells(folds: pd.DataFrame) -> pd.DataFrame:
    return (
        folds.groupby(["dataset", "method", "measure"], sort=False)["value"]
        .mean()
        .reset_index()
        .assign(imputation="")
    )


def run_benchmark(
    datasets: Sequence[Dataset],
    methods: Sequence[Method],
    measures: Sequence[Measure],
    folds: int = 5,
    repetitions: int = 10,
    seed: int = 0,
    workers: int = 1,
    parallel_folds: bool = False,
) -> BenchResult:
    """
    Benchmark methods with repeated k-fold cross-validation.

    Methods fit on each training split (tuning included) and are scored on
    the test split for every measure defined on the dataset; measures that
    do not apply to a dataset are skipped. Fit or scoring errors mark the
    fold as failed and the run continues.

    Args:
        datasets: Datasets to benchmark on
        methods: Methods to compare
        measures: Measures to record
        folds: k of the k-fold split
        repetitions: Number of CV repetitions
        seed: Seed of the CV plans and method fits
        workers: Parallel workers
        parallel_folds: Run folds concurrently with single-worker methods
            instead of giving each fit all workers

    Returns:
        BenchResult (not yet imputed)
    """
    if not datasets:
        raise BenchError("benchmark needs at least one dataset")
    if not methods:
        raise BenchError("benchmark needs at least one method")
    if not measures:
        raise BenchError("benchmark needs at least one measure")

    records: List[Dict[str, Any]] = []
    for d, dataset in enumerate(datasets):
        usable = [m for m in measures if m.is_compatible(dataset.task, dataset.n_classes)]
        for m in measures:
            if m not in usable:
                logger.warning(f"Skipping measure {m.name} on {dataset.name} ({dataset.task.value})")
        if not usable:
            logger.warning(f"No measure applies to {dataset.name}; dataset skipped")
            continue

        plan = make_cv_plan(dataset, folds, repetitions, derive_seed(seed, d))
        logger.info(
            f"Benchmarking {dataset.name}: {len(methods)} methods x {folds} folds x {repetitions} repetitions"
        )
        tasks = [
            (method, rep, fold, train_idx, test_idx, derive_seed(seed, d, rep, fold))
            for rep, fold, train_idx, test_idx in plan.iter_splits()
            for method in methods
        ]
        if parallel_folds and workers > 1:
            batches = Parallel(n_jobs=workers)(
                delayed(_run_fold)(dataset, method, rep, fold, tr, te, usable, fit_seed, 1)
                for method, rep, fold, tr, te, fit_seed in tasks
            )
        else:
            batches = []
            for method, rep, fold, tr, te, fit_seed in tasks:
                batches.append(_run_fold(dataset, method, rep, fold, tr, te, usable, fit_seed, workers))
                logger.info(f"  {dataset.name} / {method.name}: rep {rep + 1}, fold {fold + 1} done")
        for batch in batches:
            records.extend(batch)

    if not records:
        raise BenchError("no dataset had an applicable measure")
    fold_frame = pd.DataFrame(records, columns=FOLD_COLUMNS)
    return BenchResult(
        folds=fold_frame,
        cells=_cells(fold_frame),
        measures=list(measures),
        methods=[m.name for m in methods],
        datasets=list(dict.fromkeys(fold_frame["dataset"])),
        seed=seed,
        cv_folds=folds,
        repetitions=repetitions,
    )


def impute_failures(result: BenchResult) -> BenchResult:
    """
    Fill the cells of failing methods.

    A method failing on more than 20% of the folds of a (dataset, measure)
    gets the worst value among the other methods; otherwise its cell is the
    mean of its successful folds.

    Args:
        result: Benchmark result

    Returns:
        New BenchResult with every cell finite
    """
    failure = result.failures.set_index(["dataset", "method", "measure"])["failure_fraction"]
    cells = result.cells.copy()

    for (dataset, measure_name), group in cells.groupby(["dataset", "measure"], sort=False):
        measure = result.measure(measure_name)
        fractions = {m: failure[(dataset, m, measure_name)] for m in group["method"]}
        if all(fraction >= 1.0 for fraction in fractions.values()):
            raise BenchError(f"every method failed on {dataset} for {measure_name}")

        for index, row in group.iterrows():
            fraction = fractions[row["method"]]
            if fraction == 0.0:
                continue
            if fraction <= FAILURE_THRESHOLD:
                cells.at[index, "imputation"] = "mean"
                logger.info(
                    f"{row['method']} on {dataset}/{measure_name}: {fraction:.0%} failed, "
                    f"using the mean of successful folds"
                )
                continue

            others = group["method"] != row["method"]
            reliable = group["method"].map(fractions) <= FAILURE_THRESHOLD
            rivals = group[others & reliable]
            if rivals.empty:
                rivals = group[others & group["value"].notna()]
            if rivals.empty:
                raise BenchError(f"no competitor value to impute {row['method']} on {dataset}")
            values = rivals["value"].to_numpy(dtype=np.float64)
            worst = values.min() if measure.maximize else values.max()
            cells.at[index, "value"] = worst
            cells.at[index, "imputation"] = "worst"
            logger.warning(
                f"{row['method']} on {dataset}/{measure_name}: {fraction:.0%} failed, "
                f"assigned worst competitor value {worst:.4f}"
            )

    return replace(result, cells=cells, imputed=True)


def aggregate_ranks(result: BenchResult) -> pd.DataFrame:
    """
    Mean rank per method and measure (1 = best, ties share the average rank).

    Args:
        result: Imputed benchmark result

    Returns:
        DataFrame indexed by method with one column per measure
    """
    if result.cells["value"].isna().any():
        raise BenchError("rank aggregation needs imputed, finite cells")

    ranked = []
    for (_, measure_name), group in result.cells.groupby(["dataset", "measure"], sort=False):
        measure = result.measure(measure_name)
        values = group["value"].to_numpy(dtype=np.float64)
        ranks = rankdata(-values if measure.maximize else values, method="average")
        ranked.append(group.assign(rank=ranks))

    ranks = pd.concat(ranked)
    table = ranks.pivot_table(index="method", columns="measure", values="rank", aggfunc="mean")
    return table.reindex(index=result.methods, columns=[m.name for m in result.measures if m.name in table.columns])


def mean_table(result: BenchResult) -> pd.DataFrame:
    """Measures averaged over datasets plus mean training runtime, one row per method."""
    table = result.cells.pivot_table(index="method", columns="measure", values="value", aggfunc="mean")
    table = table.reindex(index=result.methods, columns=[m.name for m in result.measures if m.name in table.columns])
    table["runtime"] = result.runtimes.groupby("method")["train_time"].mean().reindex(result.methods)
    return table


def write_results(
    result: BenchResult, output_dir: Path, extra: Optional[Mapping[str, Any]] = None
) -> Dict[str, Path]:
    """
    Write means.csv, ranks.csv, folds.parquet and manifest.yaml.

    Args:
        result: Imputed benchmark result
        output_dir: Output directory
        extra: Additional manifest entries

    Returns:
        Mapping of artifact name to path
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    paths = {
        "means": output_dir / "means.csv",
        "ranks": output_dir / "ranks.csv",
        "folds": output_dir / "folds.parquet",
        "manifest": output_dir / "manifest.yaml",
    }
    mean_table(result).to_csv(paths["means"])
    aggregate_ranks(result).to_csv(paths["ranks"])
    result.folds.to_parquet(paths["folds"], index=False)

    manifest = {
        "foresttune_version": foresttune.__version__,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": int(result.seed),
        "rng_scheme": RNG_SCHEME,
        "cv_folds": int(result.cv_folds),
        "repetitions": int(result.repetitions),
        "datasets": list(result.datasets),
        "methods": list(result.methods),
        "measures": [m.name for m in result.measures],
        "failure_threshold": FAILURE_THRESHOLD,
        "versions": {
            "numpy": np.__version__,
            "pandas": pd.__version__,
        },
    }
    manifest.update(dict(extra or {}))
    with open(paths["manifest"], "w", encoding="utf-8") as f:
        yaml.safe_dump(manifest, f, sort_keys=False)

    for name, path in paths.items():
        logger.info(f"  ✓ {name}: {path}")
    return paths
