"""Command-line interface: ``foresttune <subcommand> [options]``."""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from foresttune.config import config, resolve_seed
from foresttune.data.dataset import ColumnKind, Dataset, Task, kind_overrides, load_csv, load_feature_rows, write_csv
from foresttune.data.synthetic import (
    fixture_suite,
    generate_fixtures,
    synth_blobs,
    synth_friedman1,
    synth_mixed,
    synth_monks2,
    synth_sparse_signal,
)
from foresttune.errors import ForestTuneError
from foresttune.forest.ensemble import predict, predict_proba, train
from foresttune.forest.model_io import load_model, save_model
from foresttune.forest.params import HyperParams, SplitKind, SplitRule
from foresttune.logging_utils import setup_logger
from foresttune.metrics.measures import get_measure, importance_measure, tuning_measure
from foresttune.oob.curves import oob_curve, oob_evaluation, tree_grid
from foresttune.oob.importance import importance_stability, permutation_importance
from foresttune.tuning.space import DEFAULT_PARAMETERS
from foresttune.tuning.tuner import (
    TuneConfig,
    estimate_time,
    format_duration,
    format_recommendation,
    tune,
)

logger = setup_logger(__name__)

CLASSIFICATION_MEASURES = {"mmce", "auc", "brier", "brier-binary", "logloss"}
SYNTH_KINDS = ("monks2", "sparse", "blobs", "mixed", "friedman1", "suite")


def _split_list(values: Optional[Sequence[str]]) -> List[str]:
    """Flatten repeated and comma-separated option values."""
    items: List[str] = []
    for value in values or []:
        items.extend(part.strip() for part in value.split(",") if part.strip())
    return items


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, required=True, help="Training CSV (header row, comma-separated)")
    parser.add_argument("--target", required=True, help="Name of the target column")
    parser.add_argument(
        "--categorical",
        action="append",
        help="Columns to treat as categorical (repeatable, comma-separated)",
    )
    parser.add_argument(
        "--task",
        choices=[t.value for t in Task],
        help="Force the task (default: inferred from measure and target)",
    )


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="Master seed (default: FORESTTUNE_SEED, then 42)")
    parser.add_argument(
        "--workers",
        type=int,
        default=config.WORKERS,
        help=f"Parallel workers (default: available cores, {config.WORKERS})",
    )


def _add_forest_args(parser: argparse.ArgumentParser, num_trees_default: Optional[int] = None) -> None:
    group = parser.add_argument_group("forest hyperparameters")
    group.add_argument(
        "--mtry",
        type=int,
        help="Candidate variables per split (default: floor(sqrt(p)) classification, max(1, floor(p/3)) regression)",
    )
    group.add_argument(
        "--sample-fraction", type=float, help="Fraction of n drawn per tree (default: 1.0)"
    )
    group.add_argument(
        "--replace",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Draw with replacement (default: yes)",
    )
    group.add_argument(
        "--min-node-size",
        type=int,
        help="Nodes of this size or smaller are not split (default: 1 classification, 5 regression)",
    )
    group.add_argument(
        "--num-trees",
        type=int,
        default=num_trees_default,
        help=f"Number of trees (default: {num_trees_default or 500})",
    )
    group.add_argument(
        "--split-rule",
        choices=[k.value for k in SplitKind],
        help="Split rule (default: gini classification, variance regression)",
    )
    group.add_argument(
        "--num-random-cuts", type=int, default=1, help="Cutpoints per feature for extratrees (default: 1)"
    )
    group.add_argument("--max-depth", type=int, help="Maximum tree depth (default: unlimited)")
    group.add_argument(
        "--respect-unordered-factors",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Order categorical levels by target mean (default: yes)",
    )


def _load_dataset(args: argparse.Namespace, measure_names: Sequence[str] = ()) -> Dataset:
    """Load --data with task resolution: --task, then classification-only measures, then inference."""
    overrides: Dict[str, ColumnKind] = kind_overrides(categorical=_split_list(args.categorical))
    task = args.task
    if task is None and any(name in CLASSIFICATION_MEASURES for name in measure_names):
        task = Task.CLASSIFICATION.value
    if task == Task.CLASSIFICATION.value:
        overrides[args.target] = ColumnKind.CATEGORICAL
    elif task == Task.REGRESSION.value:
        overrides[args.target] = ColumnKind.NUMERIC
    return load_csv(args.data, args.target, overrides)


def _params_from_args(args: argparse.Namespace, dataset: Dataset) -> HyperParams:
    overrides: Dict[str, Any] = {}
    for name in ("mtry", "sample_fraction", "replace", "min_node_size", "num_trees", "max_depth",
                 "respect_unordered_factors"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.split_rule is not None:
        overrides["split_rule"] = SplitRule(SplitKind(args.split_rule), args.num_random_cuts)
    return HyperParams.for_dataset(dataset, **overrides)


def _emit_csv(frame: pd.DataFrame, out: Optional[Path], index: bool = False) -> None:
    if out is None:
        frame.to_csv(sys.stdout, index=index)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=index)
    logger.info(f"Wrote {out}")


def cmd_train(args: argparse.Namespace, seed: int) -> int:
    dataset = _load_dataset(args)
    params = _params_from_args(args, dataset)
    logger.info(f"Training {dataset.name}: {params.describe()}")
    forest = train(dataset, params, seed, workers=args.workers)
    try:
        result = oob_evaluation(forest, dataset)
        logger.info(f"OOB {tuning_measure(dataset.task).name}: {result.value:.6f} ({result.n_used} rows)")
    except ForestTuneError as e:
        logger.warning(f"OOB estimate unavailable: {e}")
    out = args.out or config.MODELS_DIR / f"{dataset.name}.model"
    save_model(forest, out)
    return 0


def cmd_predict(args: argparse.Namespace, seed: int) -> int:
    forest = load_model(args.model)
    rows = load_feature_rows(args.data)
    frame = pd.DataFrame({"prediction": predict(forest, rows, workers=args.workers)})
    if args.proba and forest.classification:
        proba = predict_proba(forest, rows, workers=args.workers)
        for k, label in enumerate(forest.classes):
            frame[f"prob_{label}"] = proba[:, k]
    _emit_csv(frame, args.out)
    return 0


def cmd_tune(args: argparse.Namespace, seed: int) -> int:
    dataset = _load_dataset(args, [args.measure] if args.measure else [])
    measure = get_measure(args.measure) if args.measure else tuning_measure(dataset.task)
    parameters = tuple(_split_list(args.tune_params)) or DEFAULT_PARAMETERS
    cfg = TuneConfig(
        measure=measure,
        num_trees=args.num_trees,
        warmup=args.warmup,
        iters=args.iters,
        parameters=parameters,
        workers=args.workers,
        seed=seed,
        candidates=args.candidates,
    )
    result = tune(dataset, cfg)
    out = args.out or config.MODELS_DIR / f"{dataset.name}_tuned.model"
    save_model(result.model, out)
    if args.history:
        _emit_csv(result.history.to_frame(), args.history)
    if args.track:
        from foresttune.tuning.tracking import track_tuning

        track_tuning(result, dataset, model_path=out)
    print(format_recommendation(result))
    return 0


def cmd_estimate_time(args: argparse.Namespace, seed: int) -> int:
    dataset = _load_dataset(args)
    cfg = TuneConfig(
        num_trees=args.num_trees, warmup=args.warmup, iters=args.iters, workers=args.workers, seed=seed
    )
    print(f"Approximated time for tuning: {format_duration(estimate_time(dataset, cfg))}")
    return 0


def cmd_oob_curve(args: argparse.Namespace, seed: int) -> int:
    names = _split_list(args.measures)
    dataset = _load_dataset(args, names)
    measures = [get_measure(name) for name in names] or [tuning_measure(dataset.task)]
    params = _params_from_args(args, dataset)
    forest = train(dataset, params, seed, workers=args.workers)
    grid = [int(t) for t in _split_list(args.grid)] or tree_grid(params.num_trees, args.step)
    _emit_csv(oob_curve(forest, dataset, measures, grid).to_frame(), args.out)
    return 0


def cmd_importance(args: argparse.Namespace, seed: int) -> int:
    dataset = _load_dataset(args, [args.measure] if args.measure else [])
    measure = get_measure(args.measure) if args.measure else importance_measure(dataset.task)
    forest = train(dataset, _params_from_args(args, dataset), seed, workers=args.workers)
    report = permutation_importance(
        forest, dataset, measure, repetitions=args.repetitions, seed=seed, workers=args.workers
    )
    _emit_csv(report.to_frame(), args.out)
    return 0


def cmd_stability(args: argparse.Namespace, seed: int) -> int:
    dataset = _load_dataset(args, [args.measure] if args.measure else [])
    measure = get_measure(args.measure) if args.measure else importance_measure(dataset.task)
    matrix = importance_stability(
        dataset,
        _params_from_args(args, dataset),
        forests=args.forests,
        seed=seed,
        measure=measure,
        repetitions=args.repetitions,
        workers=args.workers,
    )
    _emit_csv(matrix, args.out, index=True)
    return 0


def cmd_synth(args: argparse.Namespace, seed: int) -> int:
    if args.kind == "suite":
        generate_fixtures(args.out or config.OUTPUT_DIR / "fixtures", seed=seed)
        return 0
    builders = {
        "monks2": lambda: synth_monks2(seed),
        "sparse": lambda: synth_sparse_signal(args.n, args.informative, args.noise, seed),
        "blobs": lambda: synth_blobs(args.n, args.classes, args.p, seed),
        "mixed": lambda: synth_mixed(args.n, seed),
        "friedman1": lambda: synth_friedman1(args.n, seed),
    }
    dataset = builders[args.kind]()
    write_csv(dataset, args.out or config.OUTPUT_DIR / f"{dataset.name}.csv")
    return 0


def cmd_benchmark(args: argparse.Namespace, seed: int) -> int:
    from foresttune.bench.benchmark import impute_failures, run_benchmark, write_results
    from foresttune.bench.methods import BenchSettings, get_methods

    datasets: List[Dataset] = []
    if args.fixtures:
        datasets.extend(fixture_suite(seed).values())
    for path in args.data or []:
        overrides = kind_overrides(categorical=_split_list(args.categorical))
        datasets.append(load_csv(path, args.target, overrides))
    if not datasets:
        raise ForestTuneError("benchmark needs --fixtures or at least one --data file")

    settings = BenchSettings(
        num_trees=args.num_trees,
        tune_num_trees=args.tune_num_trees,
        warmup=args.warmup,
        iters=args.iters,
        random_points=args.random_points,
        bootstrap_iters=args.bootstrap_iters,
    )
    methods = get_methods(_split_list(args.methods), settings)
    measures = [get_measure(name) for name in _split_list(args.measures)]
    result = run_benchmark(
        datasets,
        methods,
        measures,
        folds=args.folds,
        repetitions=args.reps,
        seed=seed,
        workers=args.workers,
        parallel_folds=args.parallel_folds,
    )
    result = impute_failures(result)
    write_results(result, args.out or config.OUTPUT_DIR / "benchmark", extra={"settings": vars(settings)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foresttune",
        description="Random forests with OOB-based hyperparameter tuning",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="<command>")

    p = subparsers.add_parser("train", help="Train a forest and save the model")
    _add_data_args(p)
    _add_forest_args(p)
    _add_run_args(p)
    p.add_argument("--out", type=Path, help="Model file (default: models/<data>.model)")
    p.set_defaults(handler=cmd_train)

    p = subparsers.add_parser("predict", help="Predict rows of a CSV with a saved model")
    p.add_argument("--model", type=Path, required=True, help="Model file")
    p.add_argument("--data", type=Path, required=True, help="CSV with the feature columns")
    p.add_argument("--proba", action="store_true", help="Add class-probability columns")
    p.add_argument("--out", type=Path, help="Predictions CSV (default: stdout)")
    _add_run_args(p)
    p.set_defaults(handler=cmd_predict)

    p = subparsers.add_parser("tune", help="Tune mtry, sample fraction and node size by SMBO on OOB error")
    _add_data_args(p)
    _add_run_args(p)
    p.add_argument("--measure", help="mmce|auc|brier|brier-binary|logloss|mse (default: brier / mse)")
    p.add_argument("--num-trees", type=int, default=config.TUNE_NUM_TREES,
                   help=f"Trees per evaluated forest (default: {config.TUNE_NUM_TREES})")
    p.add_argument("--warmup", type=int, default=config.TUNE_WARMUP,
                   help=f"Random initial design points (default: {config.TUNE_WARMUP})")
    p.add_argument("--iters", type=int, default=config.TUNE_ITERS,
                   help=f"Model-based iterations (default: {config.TUNE_ITERS})")
    p.add_argument("--tune-params", action="append",
                   help="Tuned parameters: mtry,sample_fraction,min_node_size[,replace,respect_unordered_factors]")
    p.add_argument("--candidates", type=int, default=config.SMBO_CANDIDATES,
                   help=f"Random candidates per proposal (default: {config.SMBO_CANDIDATES})")
    p.add_argument("--out", type=Path, help="Model file (default: models/<data>_tuned.model)")
    p.add_argument("--history", type=Path, help="Write the evaluation history CSV here")
    p.add_argument("--track", action="store_true", help="Log the run to MLflow")
    p.set_defaults(handler=cmd_tune)

    p = subparsers.add_parser("estimate-time", help="Approximate the runtime of a tuning run")
    _add_data_args(p)
    _add_run_args(p)
    p.add_argument("--num-trees", type=int, default=config.TUNE_NUM_TREES,
                   help=f"Trees per evaluated forest (default: {config.TUNE_NUM_TREES})")
    p.add_argument("--warmup", type=int, default=config.TUNE_WARMUP, help="Initial design points")
    p.add_argument("--iters", type=int, default=config.TUNE_ITERS, help="Model-based iterations")
    p.set_defaults(handler=cmd_estimate_time)

    p = subparsers.add_parser("oob-curve", help="OOB measures over a growing number of trees")
    _add_data_args(p)
    _add_forest_args(p)
    _add_run_args(p)
    p.add_argument("--measures", action="append", help="Measures to track (default: brier / mse)")
    p.add_argument("--grid", action="append", help="Tree counts (default: every --step trees)")
    p.add_argument("--step", type=int, default=10, help="Grid step (default: 10)")
    p.add_argument("--out", type=Path, help="Curve CSV (default: stdout)")
    p.set_defaults(handler=cmd_oob_curve)

    p = subparsers.add_parser("importance", help="Permutation variable importance on OOB rows")
    _add_data_args(p)
    _add_forest_args(p)
    _add_run_args(p)
    p.add_argument("--measure", help="Importance measure (default: mmce / mse)")
    p.add_argument("--repetitions", type=int, default=1, help="Permutations per tree (default: 1)")
    p.add_argument("--out", type=Path, help="Importance CSV (default: stdout)")
    p.set_defaults(handler=cmd_importance)

    p = subparsers.add_parser("stability", help="Rank stability of importance across forest seeds")
    _add_data_args(p)
    _add_forest_args(p)
    _add_run_args(p)
    p.add_argument("--forests", type=int, default=5, help="Number of forests (default: 5)")
    p.add_argument("--measure", help="Importance measure (default: mmce / mse)")
    p.add_argument("--repetitions", type=int, default=1, help="Permutations per tree (default: 1)")
    p.add_argument("--out", type=Path, help="Correlation matrix CSV (default: stdout)")
    p.set_defaults(handler=cmd_stability)

    p = subparsers.add_parser("synth", help="Write a synthetic fixture dataset")
    p.add_argument("kind", choices=SYNTH_KINDS, help="Fixture to generate")
    p.add_argument("--out", type=Path, help="CSV path (directory for 'suite')")
    p.add_argument("--n", type=int, default=500, help="Rows (default: 500)")
    p.add_argument("--informative", type=int, default=20, help="Informative columns of 'sparse' (default: 20)")
    p.add_argument("--noise", type=int, default=480, help="Noise columns of 'sparse' (default: 480)")
    p.add_argument("--classes", type=int, default=3, help="Classes of 'blobs' (default: 3)")
    p.add_argument("--p", type=int, default=4, help="Columns of 'blobs' (default: 4)")
    p.add_argument("--seed", type=int, help="Generator seed (default: FORESTTUNE_SEED, then 42)")
    p.set_defaults(handler=cmd_synth)

    p = subparsers.add_parser("benchmark", help="Repeated cross-validation benchmark of tuners")
    p.add_argument("--fixtures", action="store_true", help="Include the synthetic fixture suite")
    p.add_argument("--data", type=Path, action="append", help="Dataset CSV (repeatable)")
    p.add_argument("--target", default="y", help="Target column of every --data file (default: y)")
    p.add_argument("--categorical", action="append", help="Categorical columns of the --data files")
    p.add_argument("--methods", action="append", default=None,
                   help="Methods (default: default,tuned-brier)")
    p.add_argument("--measures", action="append", default=None,
                   help="Measures (default: mmce,auc,brier,logloss)")
    p.add_argument("--folds", type=int, default=5, help="CV folds (default: 5)")
    p.add_argument("--reps", type=int, default=10, help="CV repetitions (default: 10)")
    p.add_argument("--num-trees", type=int, default=500, help="Trees of untuned forests (default: 500)")
    p.add_argument("--tune-num-trees", type=int, default=500, help="Trees of tuning-time forests (default: 500)")
    p.add_argument("--warmup", type=int, default=config.TUNE_WARMUP, help="SMBO initial design points")
    p.add_argument("--iters", type=int, default=config.TUNE_ITERS, help="SMBO iterations")
    p.add_argument("--random-points", type=int, default=100, help="Random-search points (default: 100)")
    p.add_argument("--bootstrap-iters", type=int, default=25, help="caret-grid resamples (default: 25)")
    p.add_argument("--parallel-folds", action="store_true", help="Run folds concurrently")
    p.add_argument("--out", type=Path, help="Output directory (default: outputs/benchmark)")
    _add_run_args(p)
    p.set_defaults(handler=cmd_benchmark)

    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 1 on a runtime error, 2 on a usage error
    """
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    if args.command == "benchmark":
        args.methods = args.methods or ["default,tuned-brier"]
        args.measures = args.measures or ["mmce,auc,brier,logloss"]

    seed = resolve_seed(args.seed)
    logger.info(f"Seed: {seed}")
    try:
        return args.handler(args, seed)
    except ForestTuneError as e:
        print(f"foresttune: error: [{e.module}] {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"foresttune: error: [foresttune] {e}", file=sys.stderr)
        return 1


def main():
    """CLI entry point."""
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
