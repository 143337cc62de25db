"""Tests for the cross-validation benchmark, failure imputation and rank aggregation."""

import numpy as np
import pandas as pd
import pytest
import yaml

from foresttune.bench.benchmark import (
    FOLD_COLUMNS,
    BenchResult,
    _cells,
    aggregate_ranks,
    impute_failures,
    mean_table,
    run_benchmark,
    write_results,
)
from foresttune.bench.methods import BenchSettings, Method, get_methods, method_registry
from foresttune.config import config
from foresttune.data.synthetic import fixture_suite
from foresttune.errors import BenchError
from foresttune.metrics.measures import AUC, BRIER_MULTICLASS, MMCE, MSE

TINY = BenchSettings(num_trees=5, tune_num_trees=5, warmup=2, iters=1, random_points=2, bootstrap_iters=2)


def fold_records(dataset, method, values, measure="mmce"):
    """One record per fold; NaN values are failed folds."""
    return [
        {
            "dataset": dataset,
            "method": method,
            "repetition": 0,
            "fold": fold,
            "measure": measure,
            "value": value,
            "failed": bool(np.isnan(value)),
            "train_time": 1.0,
        }
        for fold, value in enumerate(values)
    ]


def make_result(records, measures=(MMCE,)):
    folds = pd.DataFrame(records, columns=FOLD_COLUMNS)
    return BenchResult(
        folds=folds,
        cells=_cells(folds),
        measures=list(measures),
        methods=list(dict.fromkeys(folds["method"])),
        datasets=list(dict.fromkeys(folds["dataset"])),
        seed=0,
        cv_folds=10,
        repetitions=1,
    )


def test_imputation_threshold():
    """Test mean imputation at 20% failures and worst-value imputation above."""
    nan = np.nan
    records = (
        fold_records("d", "a", [0.1] * 8 + [nan, nan])
        + fold_records("d", "b", [0.05] * 7 + [nan, nan, nan])
        + fold_records("d", "c", [0.3] * 10)
    )
    cells = impute_failures(make_result(records)).cells.set_index("method")

    assert cells.loc["a", "imputation"] == "mean"
    assert cells.loc["a", "value"] == pytest.approx(0.1)
    assert cells.loc["b", "imputation"] == "worst"
    assert cells.loc["b", "value"] == pytest.approx(0.3)
    assert cells.loc["c", "imputation"] == ""


def test_imputation_uses_direction():
    """Test that the worst value of a maximized measure is the minimum."""
    nan = np.nan
    records = (
        fold_records("d", "a", [0.9] * 10, "auc")
        + fold_records("d", "b", [nan] * 10, "auc")
        + fold_records("d", "c", [0.7] * 10, "auc")
    )
    cells = impute_failures(make_result(records, (AUC,))).cells.set_index("method")

    assert cells.loc["b", "value"] == pytest.approx(0.7)


def test_imputation_fails_when_everything_failed():
    """Test that nothing can be imputed without a competitor."""
    records = fold_records("d", "a", [np.nan] * 5) + fold_records("d", "b", [np.nan] * 5)
    with pytest.raises(BenchError):
        impute_failures(make_result(records))


def test_rank_sum_identity():
    """Test that the mean ranks of M methods sum to M(M+1)/2."""
    rng = np.random.default_rng(0)
    records = []
    for dataset in ("d1", "d2", "d3"):
        for method in ("a", "b", "c", "d"):
            records += fold_records(dataset, method, list(rng.random(3)))
    ranks = aggregate_ranks(impute_failures(make_result(records)))

    assert list(ranks.index) == ["a", "b", "c", "d"]
    assert ranks["mmce"].sum() == pytest.approx(4 * 5 / 2)


def test_ranks_average_ties_and_direction():
    """Test average ranks on ties and best-is-1 for a maximized measure."""
    records = (
        fold_records("d", "a", [0.8], "auc")
        + fold_records("d", "b", [0.8], "auc")
        + fold_records("d", "c", [0.9], "auc")
    )
    ranks = aggregate_ranks(impute_failures(make_result(records, (AUC,))))

    assert ranks.loc["c", "auc"] == 1.0
    assert ranks.loc["a", "auc"] == ranks.loc["b", "auc"] == 2.5


def test_ranks_need_imputed_cells():
    """Test that NaN cells are refused."""
    records = fold_records("d", "a", [np.nan]) + fold_records("d", "b", [0.2])
    with pytest.raises(BenchError):
        aggregate_ranks(make_result(records))


def test_method_registry():
    """Test method names and lookup."""
    assert set(method_registry(TINY)) == {
        "default", "tuned-brier", "tuned-mmce", "tuned-auc", "tuned-logloss",
        "tuned-mtry", "mtry-walk", "caret-grid", "random-search",
    }
    assert [m.name for m in get_methods(["default", "caret-grid"], TINY)] == ["default", "caret-grid"]
    with pytest.raises(BenchError):
        get_methods(["grid-of-doom"], TINY)


def test_run_benchmark_end_to_end(tmp_path, binary_dataset, multiclass_dataset):
    """Test a tiny benchmark with a failing method and its written outputs."""
    def broken(dataset, seed, workers):
        raise RuntimeError("no fit")

    methods = get_methods(["default", "tuned-brier"], TINY) + [Method("broken", broken)]
    result = run_benchmark(
        [binary_dataset, multiclass_dataset],
        methods,
        [MMCE, AUC, BRIER_MULTICLASS, MSE],
        folds=2,
        repetitions=1,
        seed=3,
    )

    # AUC only applies to the binary set, MSE to neither
    assert len(result.folds) == 3 * 2 * (3 + 2)
    assert set(result.folds["measure"]) == {"mmce", "auc", "brier"}
    assert result.folds.loc[result.folds["method"] == "broken", "failed"].all()
    assert not result.folds.loc[result.folds["method"] == "default", "failed"].any()

    imputed = impute_failures(result)
    broken_cells = imputed.cells[imputed.cells["method"] == "broken"]
    assert (broken_cells["imputation"] == "worst").all()
    assert mean_table(imputed).loc["default", "runtime"] >= 0

    paths = write_results(imputed, tmp_path / "bench", extra={"note": "tiny"})
    assert all(path.exists() for path in paths.values())
    manifest = yaml.safe_load(paths["manifest"].read_text(encoding="utf-8"))
    assert manifest["seed"] == 3
    assert manifest["failure_threshold"] == 0.2
    assert manifest["note"] == "tiny"
    folds = pd.read_parquet(paths["folds"])
    assert list(folds.columns) == FOLD_COLUMNS
    ranks = pd.read_csv(paths["ranks"], index_col=0)
    assert list(ranks.index) == ["default", "tuned-brier", "broken"]


def test_benchmark_is_reproducible(binary_dataset):
    """Test that a seed reproduces every fold value."""
    methods = get_methods(["default"], TINY)
    a = run_benchmark([binary_dataset], methods, [MMCE], folds=2, repetitions=2, seed=1)
    b = run_benchmark([binary_dataset], methods, [MMCE], folds=2, repetitions=2, seed=1)

    np.testing.assert_array_equal(a.folds["value"].to_numpy(), b.folds["value"].to_numpy())


def test_benchmark_needs_inputs(binary_dataset):
    """Test argument validation."""
    with pytest.raises(BenchError):
        run_benchmark([], get_methods(["default"], TINY), [MMCE])
    with pytest.raises(BenchError):
        run_benchmark([binary_dataset], get_methods(["default"], TINY), [MSE], folds=2, repetitions=1)


@pytest.mark.slow
def test_tuned_brier_beats_defaults_on_fixture_suite():
    """Test that Brier tuning is no worse than defaults in mean Brier and mean MMCE."""
    settings = BenchSettings(num_trees=100, tune_num_trees=100, warmup=10, iters=20)
    result = run_benchmark(
        list(fixture_suite(seed=0).values()),
        get_methods(["default", "tuned-brier"], settings),
        [MMCE, BRIER_MULTICLASS],
        folds=5,
        repetitions=1,
        seed=0,
        workers=config.WORKERS,
        parallel_folds=True,
    )
    table = mean_table(impute_failures(result))

    assert table.loc["tuned-brier", "brier"] <= table.loc["default", "brier"]
    assert table.loc["default", "mmce"] - table.loc["tuned-brier", "mmce"] >= 0
