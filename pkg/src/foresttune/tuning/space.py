"""Tunable hyperparameter space on the unit cube."""

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from foresttune.config import config
from foresttune.data.dataset import Task
from foresttune.errors import SpaceError
from foresttune.seeding import round_half_up

DEFAULT_PARAMETERS = ("mtry", "sample_fraction", "min_node_size")
OPTIONAL_PARAMETERS = ("replace", "respect_unordered_factors")

SAMPLE_FRACTION_RANGE = (0.2, 0.9)
NODE_SIZE_BASE_FRACTION = 0.2


class ParamKind(str, Enum):
    INTEGER = "integer"
    CONTINUOUS = "continuous"
    BOOLEAN = "boolean"
    TRANSFORMED_INTEGER = "transformed-integer"


@dataclass(frozen=True)
class PowerTransform:
    """x in [0, 1] -> round(base ** x), clamped to [lo, hi]."""

    base: float
    lo: int
    hi: int

    def __call__(self, x: float) -> int:
        return min(self.hi, max(self.lo, round_half_up(self.base ** x)))

    def inverse(self, value: float) -> float:
        if self.base <= 1.0 or value <= 1.0:
            return 0.0
        return float(min(1.0, math.log(value) / math.log(self.base)))

    def describe(self) -> str:
        return f"round({self.base:g}^x)"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: ParamKind
    lo: float = 0.0
    hi: float = 1.0
    transform: Optional[PowerTransform] = None

    def __post_init__(self):
        if self.kind is ParamKind.INTEGER and self.lo > self.hi:
            raise SpaceError(f"{self.name}: integer range needs lo <= hi, got [{self.lo}, {self.hi}]")
        if self.kind is ParamKind.CONTINUOUS and not self.lo < self.hi:
            raise SpaceError(f"{self.name}: continuous range needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.kind is ParamKind.TRANSFORMED_INTEGER and self.transform is None:
            raise SpaceError(f"{self.name}: transformed integer needs a transform")

    @classmethod
    def integer(cls, name: str, lo: int, hi: int) -> "ParamSpec":
        return cls(name, ParamKind.INTEGER, lo, hi)

    @classmethod
    def continuous(cls, name: str, lo: float, hi: float) -> "ParamSpec":
        return cls(name, ParamKind.CONTINUOUS, lo, hi)

    @classmethod
    def boolean(cls, name: str) -> "ParamSpec":
        return cls(name, ParamKind.BOOLEAN)

    @classmethod
    def transformed(cls, name: str, transform: PowerTransform) -> "ParamSpec":
        return cls(name, ParamKind.TRANSFORMED_INTEGER, transform.lo, transform.hi, transform)

    @property
    def is_integer(self) -> bool:
        return self.kind in (ParamKind.INTEGER, ParamKind.TRANSFORMED_INTEGER)

    def decode(self, x: float) -> Any:
        """Map a unit-interval coordinate to a parameter value."""
        if self.kind is ParamKind.BOOLEAN:
            return bool(x >= 0.5)
        if self.kind is ParamKind.TRANSFORMED_INTEGER:
            return self.transform(x)
        value = self.lo + x * (self.hi - self.lo)
        if self.kind is ParamKind.INTEGER:
            return int(min(self.hi, max(self.lo, round_half_up(value))))
        return float(min(self.hi, max(self.lo, value)))

    def encode(self, value: Any) -> float:
        """Unit-interval coordinate that decodes to ``value``."""
        if self.kind is ParamKind.BOOLEAN:
            return 1.0 if value else 0.0
        if self.kind is ParamKind.TRANSFORMED_INTEGER:
            return self.transform.inverse(value)
        if self.hi == self.lo:
            return 0.0
        return float(min(1.0, max(0.0, (value - self.lo) / (self.hi - self.lo))))

    def clamp(self, value: Any) -> Any:
        if self.kind is ParamKind.BOOLEAN:
            return bool(value)
        if self.is_integer:
            return int(min(self.hi, max(self.lo, value)))
        return float(min(self.hi, max(self.lo, value)))

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "lo": self.lo if self.kind is not ParamKind.BOOLEAN else False,
            "hi": self.hi if self.kind is not ParamKind.BOOLEAN else True,
            "transform": self.transform.describe() if self.transform else "-",
        }


@dataclass(frozen=True)
class ParamSpace:
    """Ordered parameter specs; ``task``, ``n`` and ``p`` record the data it was built for."""

    specs: Tuple[ParamSpec, ...]
    task: Optional[Task] = None
    n: Optional[int] = None
    p: Optional[int] = None

    def __post_init__(self):
        names = [spec.name for spec in self.specs]
        if not names:
            raise SpaceError("parameter space is empty")
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate parameter names: {names}")

    @property
    def dimension(self) -> int:
        return len(self.specs)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(spec.name for spec in self.specs)

    def spec(self, name: str) -> ParamSpec:
        for spec in self.specs:
            if spec.name == name:
                return spec
        raise SpaceError(f"no parameter named '{name}'")

    def to_frame(self) -> pd.DataFrame:
        """Name / kind / lo / hi / transform table for tuning logs."""
        return pd.DataFrame([spec.describe() for spec in self.specs])


def default_space(
    task: Task,
    n: int,
    p: int,
    parameters: Sequence[str] = DEFAULT_PARAMETERS,
) -> ParamSpace:
    """
    The tuned space: mtry in [1, p], sample_fraction in [0.2, 0.9] and
    min_node_size = round((0.2 n)^x) for x in [0, 1], plus optional Boolean
    ``replace`` and ``respect_unordered_factors`` dimensions.

    Args:
        task: Learning task
        n: Number of training observations
        p: Number of predictors
        parameters: Names of the tuned parameters, in space order

    Returns:
        ParamSpace
    """
    if p < 1 or n < 1:
        raise SpaceError(f"space needs n >= 1 and p >= 1, got n={n}, p={p}")
    unknown = set(parameters) - set(DEFAULT_PARAMETERS) - set(OPTIONAL_PARAMETERS)
    if unknown:
        raise SpaceError(f"unknown tunable parameters: {sorted(unknown)}")

    # below n = 5 the base drops under 1 and node size stays 1
    base = max(1.0, NODE_SIZE_BASE_FRACTION * n)
    builders = {
        "mtry": lambda: ParamSpec.integer("mtry", 1, p),
        "sample_fraction": lambda: ParamSpec.continuous("sample_fraction", *SAMPLE_FRACTION_RANGE),
        "min_node_size": lambda: ParamSpec.transformed(
            "min_node_size", PowerTransform(base=base, lo=1, hi=n)
        ),
        "replace": lambda: ParamSpec.boolean("replace"),
        "respect_unordered_factors": lambda: ParamSpec.boolean("respect_unordered_factors"),
    }
    return ParamSpace(
        specs=tuple(builders[name]() for name in parameters),
        task=task,
        n=n,
        p=p,
    )


def _as_points(space: ParamSpace, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != space.dimension:
        raise SpaceError(
            f"point dimension {points.shape[1]} does not match space dimension {space.dimension}"
        )
    if np.any(points < 0.0) or np.any(points > 1.0):
        raise SpaceError("encoded points must lie in the unit cube")
    return points


def decode(space: ParamSpace, point: np.ndarray) -> Dict[str, Any]:
    """Decode one unit-cube point into a ``{name: value}`` hyperparameter fragment."""
    (coordinates,) = _as_points(space, point)
    return {spec.name: spec.decode(x) for spec, x in zip(space.specs, coordinates)}


def encode(space: ParamSpace, fragment: Dict[str, Any]) -> np.ndarray:
    return np.array([spec.encode(fragment[spec.name]) for spec in space.specs])


def sample_uniform(space: ParamSpace, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. uniform points on the unit cube, shape (count, d)."""
    if count < 1:
        raise SpaceError(f"sample count must be >= 1, got {count}")
    return rng.random((count, space.dimension))


def grid(
    space: ParamSpace,
    resolutions: Sequence[int],
    cap: Optional[int] = None,
) -> np.ndarray:
    """
    Cartesian grid of evenly spaced coordinates, lexicographic order.

    A resolution of 1 places the single value at 0.5.

    Args:
        space: Parameter space
        resolutions: Points per dimension
        cap: Maximum grid size (defaults to FORESTTUNE_GRID_CAP)

    Returns:
        Array of shape (prod(resolutions), d)
    """
    cap = config.GRID_CAP if cap is None else cap
    if len(resolutions) != space.dimension:
        raise SpaceError(
            f"{len(resolutions)} resolutions given for a {space.dimension}-dimensional space"
        )
    if any(r < 1 for r in resolutions):
        raise SpaceError(f"resolutions must be >= 1, got {list(resolutions)}")
    size = math.prod(resolutions)
    if size > cap:
        raise SpaceError(f"grid of {size} points exceeds the cap of {cap}")

    axes = [np.linspace(0.0, 1.0, r) if r > 1 else np.array([0.5]) for r in resolutions]
    return np.array(list(itertools.product(*axes)), dtype=np.float64)
