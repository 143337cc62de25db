"""Benchmark methods: default forests, model-based tuners and baseline tuners."""

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

from foresttune.data.dataset import Dataset
from foresttune.errors import BenchError
from foresttune.forest.ensemble import Forest, train
from foresttune.forest.params import HyperParams
from foresttune.metrics.measures import get_measure
from foresttune.tuning.baselines import tune_grid_caret, tune_mtry_walk, tune_random
from foresttune.tuning.tuner import TuneConfig, tune

Fit = Callable[[Dataset, int, int], Forest]


@dataclass(frozen=True)
class BenchSettings:
    """Sizes used by the benchmark methods."""

    num_trees: int = 500
    tune_num_trees: int = 500
    warmup: int = 30
    iters: int = 70
    random_points: int = 100
    bootstrap_iters: int = 25


@dataclass(frozen=True)
class Method:
    """A named way to fit a forest on a training split: ``fit(train, seed, workers)``."""

    name: str
    fit: Fit


def _default(settings: BenchSettings) -> Fit:
    def fit(dataset: Dataset, seed: int, workers: int) -> Forest:
        params = HyperParams.for_dataset(dataset, num_trees=settings.num_trees)
        return train(dataset, params, seed, workers=workers)
    return fit


def _tuned(settings: BenchSettings, measure_name: str, parameters: Sequence[str]) -> Fit:
    def fit(dataset: Dataset, seed: int, workers: int) -> Forest:
        cfg = TuneConfig(
            measure=get_measure(measure_name),
            num_trees=settings.tune_num_trees,
            warmup=settings.warmup,
            iters=settings.iters,
            parameters=tuple(parameters),
            workers=workers,
            seed=seed,
        )
        return tune(dataset, cfg).model
    return fit


def _mtry_walk(settings: BenchSettings) -> Fit:
    def fit(dataset: Dataset, seed: int, workers: int) -> Forest:
        params = tune_mtry_walk(dataset, num_trees=settings.num_trees, seed=seed, workers=workers)
        return train(dataset, params, seed, workers=workers)
    return fit


def _caret_grid(settings: BenchSettings) -> Fit:
    def fit(dataset: Dataset, seed: int, workers: int) -> Forest:
        params = tune_grid_caret(
            dataset,
            bootstrap_iters=settings.bootstrap_iters,
            num_trees=settings.num_trees,
            seed=seed,
            workers=workers,
        )
        return train(dataset, params, seed, workers=workers)
    return fit


def _random_search(settings: BenchSettings) -> Fit:
    def fit(dataset: Dataset, seed: int, workers: int) -> Forest:
        params = tune_random(
            dataset, settings.random_points, num_trees=settings.tune_num_trees, seed=seed, workers=workers
        )
        return train(dataset, params, seed, workers=workers)
    return fit


def method_registry(settings: BenchSettings = BenchSettings()) -> Dict[str, Method]:
    """All benchmark methods keyed by name."""
    full = ("mtry", "sample_fraction", "min_node_size")
    fits = {
        "default": _default(settings),
        "tuned-brier": _tuned(settings, "brier", full),
        "tuned-mmce": _tuned(settings, "mmce", full),
        "tuned-auc": _tuned(settings, "auc", full),
        "tuned-logloss": _tuned(settings, "logloss", full),
        "tuned-mtry": _tuned(settings, "brier", ("mtry",)),
        "mtry-walk": _mtry_walk(settings),
        "caret-grid": _caret_grid(settings),
        "random-search": _random_search(settings),
    }
    return {name: Method(name, fit) for name, fit in fits.items()}


def get_methods(names: Sequence[str], settings: BenchSettings = BenchSettings()) -> List[Method]:
    registry = method_registry(settings)
    unknown = [name for name in names if name not in registry]
    if unknown:
        raise BenchError(f"unknown methods {unknown} (choose from {', '.join(registry)})")
    return [registry[name] for name in names]
