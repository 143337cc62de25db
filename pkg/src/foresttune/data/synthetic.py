"""Generate synthetic fixture datasets.

``synth_monks2`` and ``synth_sparse_signal`` reproduce two failure modes of
default random-forest settings: an interaction target that needs every
attribute as split candidate, and a few informative columns buried in noise.
"""

import itertools
from pathlib import Path
from typing import Dict

import numpy as np
import pandas as pd

from foresttune.data.dataset import ColumnType, Dataset, Task, write_csv
from foresttune.errors import DataError
from foresttune.logging_utils import setup_logger
from foresttune.seeding import generator

logger = setup_logger(__name__)

# Level counts of the six attributes in the canonical MONK's problems
MONKS_LEVEL_COUNTS = (3, 3, 2, 3, 4, 2)


def synth_monks2(seed: int = 0) -> Dataset:
    """
    Full factorial MONK-2 dataset (432 rows).

    The label is "1" iff exactly two attributes take their level "2". The
    factorial is complete and ordered, so the seed only names the dataset.

    Args:
        seed: Accepted for a uniform generator signature

    Returns:
        Classification Dataset with six categorical attributes
    """
    names = [f"a{i + 1}" for i in range(len(MONKS_LEVEL_COUNTS))]
    rows = list(itertools.product(*[range(1, count + 1) for count in MONKS_LEVEL_COUNTS]))

    frame = pd.DataFrame(rows, columns=names).astype(str)
    frame["y"] = ((frame[names] == "2").sum(axis=1) == 2).astype(int).astype(str)

    column_types = {
        name: ColumnType.categorical([str(level) for level in range(1, count + 1)])
        for name, count in zip(names, MONKS_LEVEL_COUNTS)
    }
    return Dataset.from_frame(
        name="monks2",
        frame=frame,
        target="y",
        column_types=column_types,
        task=Task.CLASSIFICATION,
        classes=("0", "1"),
    )


def synth_sparse_signal(
    n: int,
    informative: int,
    noise: int,
    seed: int,
    shift: float = 1.0,
) -> Dataset:
    """
    Binary task with a few informative columns among many noise columns.

    Informative columns are N(±shift/2, 1) depending on the class; noise
    columns are N(0, 1) independent of the label. Classes are balanced.

    Args:
        n: Number of rows
        informative: Number of informative columns
        noise: Number of noise columns
        seed: Random seed
        shift: Distance between the class-conditional means

    Returns:
        Classification Dataset with p = informative + noise numeric columns
    """
    if n < 2:
        raise DataError(f"sparse-signal dataset needs n >= 2, got {n}")
    if informative < 1 or noise < 0:
        raise DataError("need informative >= 1 and noise >= 0")

    rng = generator(seed)
    labels = rng.permutation(np.repeat([0, 1], [n // 2, n - n // 2]))
    sign = 2.0 * labels - 1.0

    signal = rng.standard_normal((n, informative)) + 0.5 * shift * sign[:, None]
    clutter = rng.standard_normal((n, noise))

    frame = pd.DataFrame(
        np.hstack([signal, clutter]),
        columns=[f"inf_{j + 1}" for j in range(informative)]
        + [f"noise_{j + 1}" for j in range(noise)],
    )
    column_types = {column: ColumnType.numeric() for column in frame.columns}
    frame["y"] = labels.astype(str)

    return Dataset.from_frame(
        name=f"sparse_{informative}_{noise}",
        frame=frame,
        target="y",
        column_types=column_types,
        task=Task.CLASSIFICATION,
        classes=("0", "1"),
    )


def synth_blobs(n: int, classes: int, p: int, seed: int, spread: float = 1.5) -> Dataset:
    """Multiclass Gaussian blobs with centres drawn in [-spread, spread]^p."""
    if classes < 2 or p < 1 or n < classes:
        raise DataError("blobs need classes >= 2, p >= 1 and n >= classes")

    rng = generator(seed)
    centres = rng.uniform(-spread, spread, size=(classes, p))
    labels = np.arange(n) % classes
    rng.shuffle(labels)
    values = centres[labels] + rng.standard_normal((n, p))

    frame = pd.DataFrame(values, columns=[f"x{j + 1}" for j in range(p)])
    column_types = {column: ColumnType.numeric() for column in frame.columns}
    class_labels = tuple(f"c{c}" for c in range(classes))
    frame["y"] = [class_labels[c] for c in labels]

    return Dataset.from_frame(
        name=f"blobs_{classes}",
        frame=frame,
        target="y",
        column_types=column_types,
        task=Task.CLASSIFICATION,
        classes=class_labels,
    )


def synth_mixed(n: int, seed: int) -> Dataset:
    """Binary task mixing a many-level categorical, a numeric signal and noise."""
    if n < 2:
        raise DataError(f"mixed dataset needs n >= 2, got {n}")

    rng = generator(seed)
    levels = [f"g{k}" for k in range(8)]
    group = rng.integers(0, len(levels), size=n)
    group_effect = np.linspace(-1.5, 1.5, len(levels))[group]
    x = rng.standard_normal(n)
    z = rng.standard_normal(n)
    logit = group_effect + 1.5 * x
    labels = (rng.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(int)

    frame = pd.DataFrame({
        "group": [levels[g] for g in group],
        "x": x,
        "z": z,
        "y": labels.astype(str),
    })
    column_types = {
        "group": ColumnType.categorical(pd.unique(frame["group"])),
        "x": ColumnType.numeric(),
        "z": ColumnType.numeric(),
    }
    return Dataset.from_frame(
        name="mixed",
        frame=frame,
        target="y",
        column_types=column_types,
        task=Task.CLASSIFICATION,
        classes=("0", "1"),
    )


def synth_friedman1(n: int, seed: int, noise_sd: float = 1.0, noise_columns: int = 5) -> Dataset:
    """Friedman #1 regression: 10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + eps."""
    if n < 2:
        raise DataError(f"friedman dataset needs n >= 2, got {n}")

    rng = generator(seed)
    x = rng.random((n, 5 + noise_columns))
    y = (
        10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
        + 20.0 * (x[:, 2] - 0.5) ** 2
        + 10.0 * x[:, 3]
        + 5.0 * x[:, 4]
        + noise_sd * rng.standard_normal(n)
    )

    frame = pd.DataFrame(x, columns=[f"x{j + 1}" for j in range(x.shape[1])])
    column_types = {column: ColumnType.numeric() for column in frame.columns}
    frame["y"] = y

    return Dataset.from_frame(
        name="friedman1",
        frame=frame,
        target="y",
        column_types=column_types,
        task=Task.REGRESSION,
    )


def fixture_suite(seed: int = 0) -> Dict[str, Dataset]:
    """Small classification fixtures used by the benchmark harness."""
    return {
        "monks2": synth_monks2(seed),
        "sparse": synth_sparse_signal(n=300, informative=5, noise=45, seed=seed),
        "sparse_wide": synth_sparse_signal(n=200, informative=10, noise=190, seed=seed + 1),
        "blobs": synth_blobs(n=300, classes=3, p=4, seed=seed),
        "mixed": synth_mixed(n=300, seed=seed),
    }


def generate_fixtures(output_dir: Path, seed: int = 0) -> Dict[str, Path]:
    """
    Write every fixture of the suite as CSV.

    Args:
        output_dir: Directory for the CSV files
        seed: Generator seed

    Returns:
        Mapping of fixture name to written path
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"Generating fixtures in: {output_dir}")

    written = {}
    for name, dataset in fixture_suite(seed).items():
        path = output_dir / f"{name}.csv"
        write_csv(dataset, path)
        logger.info(f"  ✓ {name}.csv: {dataset.n} rows, {dataset.p} predictors")
        written[name] = path
    return written
