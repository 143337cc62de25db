"""Random-forest hyperparameters and their customary defaults."""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional

from foresttune.data.dataset import Dataset, Task
from foresttune.errors import InvalidParamsError, TaskMismatchError


class SplitKind(str, Enum):
    GINI = "gini"
    VARIANCE = "variance"
    EXTRA_RANDOM = "extratrees"


@dataclass(frozen=True)
class SplitRule:
    """Split criterion; ``num_random_cuts`` only matters for EXTRA_RANDOM."""

    kind: SplitKind
    num_random_cuts: int = 1

    def __post_init__(self):
        if self.num_random_cuts < 1:
            raise InvalidParamsError(f"num_random_cuts must be >= 1, got {self.num_random_cuts}")

    @classmethod
    def default_for(cls, task: Task) -> "SplitRule":
        return cls(SplitKind.GINI if task is Task.CLASSIFICATION else SplitKind.VARIANCE)

    def check_task(self, task: Task) -> None:
        if self.kind is SplitKind.GINI and task is not Task.CLASSIFICATION:
            raise TaskMismatchError("gini split rule requires a classification task")
        if self.kind is SplitKind.VARIANCE and task is not Task.REGRESSION:
            raise TaskMismatchError("variance split rule requires a regression task")

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "num_random_cuts": self.num_random_cuts}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "SplitRule":
        return cls(SplitKind(payload["kind"]), int(payload["num_random_cuts"]))


def default_mtry(task: Task, p: int) -> int:
    """floor(sqrt(p)) for classification, max(1, floor(p / 3)) for regression."""
    if task is Task.CLASSIFICATION:
        return max(1, math.isqrt(p))
    return max(1, p // 3)


def default_min_node_size(task: Task) -> int:
    return 1 if task is Task.CLASSIFICATION else 5


@dataclass(frozen=True)
class HyperParams:
    """Complete random-forest configuration."""

    mtry: int
    sample_fraction: float = 1.0
    replace: bool = True
    min_node_size: int = 1
    num_trees: int = 500
    split_rule: SplitRule = field(default_factory=lambda: SplitRule(SplitKind.GINI))
    max_depth: Optional[int] = None
    respect_unordered_factors: bool = True

    @classmethod
    def defaults(cls, task: Task, p: int, **overrides: Any) -> "HyperParams":
        """
        Customary defaults: sqrt(p) / p/3 candidate variables, bootstrap of size n,
        node size 1 (classification) or 5 (regression), 500 trees.

        Args:
            task: Learning task
            p: Number of predictors
            **overrides: Fields to set explicitly

        Returns:
            HyperParams
        """
        params = cls(
            mtry=default_mtry(task, p),
            sample_fraction=1.0,
            replace=True,
            min_node_size=default_min_node_size(task),
            num_trees=500,
            split_rule=SplitRule.default_for(task),
        )
        return replace(params, **overrides) if overrides else params

    @classmethod
    def for_dataset(cls, dataset: Dataset, **overrides: Any) -> "HyperParams":
        return cls.defaults(dataset.task, dataset.p, **overrides)

    def with_updates(self, **updates: Any) -> "HyperParams":
        return replace(self, **updates)

    def validate(self, dataset: Dataset) -> None:
        """Raise if these params cannot train a forest on ``dataset``."""
        if not 1 <= self.mtry <= dataset.p:
            raise InvalidParamsError(f"mtry must be in [1, {dataset.p}], got {self.mtry}")
        if not 0.0 < self.sample_fraction <= 1.0:
            raise InvalidParamsError(
                f"sample_fraction must be in (0, 1], got {self.sample_fraction}"
            )
        if self.min_node_size < 1:
            raise InvalidParamsError(f"min_node_size must be >= 1, got {self.min_node_size}")
        if self.num_trees < 1:
            raise InvalidParamsError(f"num_trees must be >= 1, got {self.num_trees}")
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidParamsError(f"max_depth must be >= 1, got {self.max_depth}")
        self.split_rule.check_task(dataset.task)

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["split_rule"] = self.split_rule.to_dict()
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "HyperParams":
        payload = dict(payload)
        payload["split_rule"] = SplitRule.from_dict(payload["split_rule"])
        return cls(**payload)

    def describe(self) -> str:
        """One-line summary in ``name=value`` form."""
        return ",".join(
            [
                f"mtry={self.mtry}",
                f"min_node_size={self.min_node_size}",
                f"sample_fraction={self.sample_fraction:.4g}",
                f"replace={self.replace}",
                f"num_trees={self.num_trees}",
                f"split_rule={self.split_rule.kind.value}",
                f"max_depth={self.max_depth}",
                f"respect_unordered_factors={self.respect_unordered_factors}",
            ]
        )
