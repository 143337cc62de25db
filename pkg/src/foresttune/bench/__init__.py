"""Cross-validated benchmark of default and tuned forests."""

from foresttune.bench.benchmark import (
    BenchResult,
    aggregate_ranks,
    impute_failures,
    run_benchmark,
    write_results,
)
from foresttune.bench.methods import BenchSettings, Method, get_methods, method_registry
