"""Dataset schema, CSV loading and validation."""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml

from foresttune.errors import (
    DataError,
    DataFileNotFoundError,
    EmptyDatasetError,
    MissingTargetError,
    MissingValueError,
    RaggedRowError,
)
from foresttune.logging_utils import setup_logger

logger = setup_logger(__name__)


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class Task(str, Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


@dataclass(frozen=True)
class ColumnType:
    """Type of a predictor column; categorical levels keep first-appearance order."""

    kind: ColumnKind
    levels: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind is ColumnKind.CATEGORICAL:
            if not self.levels:
                raise DataError("categorical column needs at least one level")
            if len(set(self.levels)) != len(self.levels):
                raise DataError(f"duplicate categorical levels: {list(self.levels)}")
        elif self.levels:
            raise DataError("numeric column cannot carry levels")

    @classmethod
    def numeric(cls) -> "ColumnType":
        return cls(ColumnKind.NUMERIC)

    @classmethod
    def categorical(cls, levels: Sequence[str]) -> "ColumnType":
        return cls(ColumnKind.CATEGORICAL, tuple(str(level) for level in levels))

    @property
    def is_categorical(self) -> bool:
        return self.kind is ColumnKind.CATEGORICAL


@dataclass
class Dataset:
    """
    Columnar feature table with a classification or regression target.

    Numeric features are stored as float64 columns, categorical features as
    pandas Categoricals whose categories are the declared levels. A
    classification target is a Categorical over ``classes``.
    """

    name: str
    features: pd.DataFrame
    column_types: Dict[str, ColumnType]
    target_name: str
    target: pd.Series
    task: Task
    classes: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if list(self.features.columns) != list(self.column_types):
            raise DataError("feature columns and column types disagree")
        if self.p < 1:
            raise DataError("dataset needs at least one predictor column")
        if self.n < 1:
            raise EmptyDatasetError(f"dataset '{self.name}' has no rows")
        if len(self.target) != self.n:
            raise DataError("target length differs from feature length")
        if self.features.isna().to_numpy().any() or self.target.isna().any():
            raise MissingValueError(f"dataset '{self.name}' contains missing values")
        if self.task is Task.CLASSIFICATION:
            if not self.classes:
                raise DataError("classification dataset needs class labels")
            unknown = set(self.target.astype(str)) - set(self.classes)
            if unknown:
                raise DataError(f"target values outside class labels: {sorted(unknown)}")

    @property
    def n(self) -> int:
        return len(self.features)

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def feature_names(self) -> List[str]:
        return list(self.features.columns)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def y(self) -> np.ndarray:
        """Target as class codes (classification) or float64 values (regression)."""
        if self.task is Task.CLASSIFICATION:
            lookup = {label: code for code, label in enumerate(self.classes)}
            return self.target.astype(str).map(lookup).to_numpy(dtype=np.int64)
        return self.target.to_numpy(dtype=np.float64)

    def codes(self, column: str) -> np.ndarray:
        """Level codes (first-appearance order) of a categorical column."""
        levels = self.column_types[column].levels
        lookup = {level: code for code, level in enumerate(levels)}
        return self.features[column].astype(str).map(lookup).to_numpy(dtype=np.int64)

    def take(self, indices: Sequence[int], name: Optional[str] = None) -> "Dataset":
        """Row subset (duplicates allowed) keeping the full schema."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            name=name or self.name,
            features=self.features.iloc[indices].reset_index(drop=True),
            column_types=dict(self.column_types),
            target_name=self.target_name,
            target=self.target.iloc[indices].reset_index(drop=True),
            task=self.task,
            classes=self.classes,
        )

    @classmethod
    def from_frame(
        cls,
        name: str,
        frame: pd.DataFrame,
        target: str,
        column_types: Mapping[str, ColumnType],
        task: Task,
        classes: Sequence[str] = (),
    ) -> "Dataset":
        """Build a dataset from a frame of raw values and an explicit schema."""
        columns = {}
        for column, column_type in column_types.items():
            values = frame[column].reset_index(drop=True)
            if column_type.is_categorical:
                columns[column] = pd.Categorical(
                    values.astype(str), categories=list(column_type.levels)
                )
            else:
                columns[column] = values.astype(np.float64)
        features = pd.DataFrame(columns, index=pd.RangeIndex(len(frame)))

        target_values = frame[target].reset_index(drop=True)
        if task is Task.CLASSIFICATION:
            classes = tuple(str(c) for c in classes)
            target_series = pd.Series(
                pd.Categorical(target_values.astype(str), categories=list(classes)),
                name=target,
            )
        else:
            target_series = target_values.astype(np.float64).rename(target)

        return cls(
            name=name,
            features=features,
            column_types=dict(column_types),
            target_name=target,
            target=target_series,
            task=task,
            classes=tuple(classes),
        )


def _first_appearance_levels(values: pd.Series) -> Tuple[str, ...]:
    return tuple(pd.unique(values.astype(str)))


def _is_numeric(values: pd.Series) -> bool:
    return bool(pd.to_numeric(values, errors="coerce").notna().all())


def schema_path(path: Path) -> Path:
    """Schema sidecar written next to a CSV by ``write_csv``."""
    return Path(path).with_suffix(".schema.yaml")


def _raise_ragged(n_fields: int):
    def on_bad_line(line: List[str]) -> None:
        raise RaggedRowError(f"ragged row: expected {n_fields} fields, found {len(line)}: {line}")
    return on_bad_line


def _read_frame(path: Path) -> pd.DataFrame:
    """Read a CSV as strings, rejecting ragged rows and empty cells."""
    if not path.exists():
        raise DataFileNotFoundError(f"file not found: {path}")

    try:
        header = pd.read_csv(path, nrows=0, encoding="utf-8").columns
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"{path.name} is empty (no header row)") from None

    frame = pd.read_csv(
        path,
        dtype=str,
        keep_default_na=False,
        index_col=False,
        engine="python",
        on_bad_lines=_raise_ragged(len(header)),
        encoding="utf-8",
    )
    frame.columns = [str(column).strip() for column in frame.columns]
    if frame.empty:
        raise EmptyDatasetError(f"{path.name} has a header but no data rows")

    # short rows are padded with NaN, empty fields stay ""
    short = frame.isna().any(axis=1).to_numpy()
    if short.any():
        row = int(np.flatnonzero(short)[0]) + 1
        found = int(frame.iloc[row - 1].notna().sum())
        raise RaggedRowError(f"ragged row {row}: expected {len(frame.columns)} fields, found {found}")

    frame = frame.apply(lambda column: column.str.strip())
    empty = frame.eq("")
    if empty.to_numpy().any():
        row, col = np.argwhere(empty.to_numpy())[0]
        raise MissingValueError(f"missing value at row {row + 1}, column {frame.columns[col]}")
    return frame


def _read_schema(path: Path) -> Optional[Dict[str, Any]]:
    sidecar = schema_path(path)
    if not sidecar.exists():
        return None
    with open(sidecar, "r", encoding="utf-8") as f:
        schema = yaml.safe_load(f)
    if not isinstance(schema, dict) or "columns" not in schema:
        raise DataError(f"malformed schema file {sidecar.name}")
    logger.info(f"Using column types from {sidecar.name}")
    return schema


def _declared_types(schema: Optional[Mapping[str, Any]]) -> Dict[str, ColumnType]:
    """Column types recorded in a schema sidecar, target included."""
    if schema is None:
        return {}
    declared = {
        column["name"]: (
            ColumnType.categorical(column["levels"])
            if column["kind"] == ColumnKind.CATEGORICAL.value
            else ColumnType.numeric()
        )
        for column in schema["columns"]
    }
    if schema.get("task") == Task.CLASSIFICATION.value:
        declared[schema["target"]] = ColumnType.categorical(schema["classes"])
    elif "target" in schema:
        declared[schema["target"]] = ColumnType.numeric()
    return declared


def _resolve_type(
    values: pd.Series, kind: Optional[ColumnKind], declared: Optional[ColumnType], column: str
) -> ColumnType:
    """Kind from the override, then the sidecar, then inference; sidecar levels when they fit."""
    if kind is None:
        kind = declared.kind if declared is not None else None
    if kind is None:
        kind = ColumnKind.NUMERIC if _is_numeric(values) else ColumnKind.CATEGORICAL
    if kind is ColumnKind.NUMERIC:
        if not _is_numeric(values):
            raise DataError(f"column '{column}' is not numeric")
        return ColumnType.numeric()
    if declared is not None and declared.is_categorical and set(values) <= set(declared.levels):
        return declared
    return ColumnType.categorical(_first_appearance_levels(values))


def load_csv(
    path: Path,
    target: str,
    overrides: Optional[Mapping[str, ColumnKind]] = None,
    name: Optional[str] = None,
) -> Dataset:
    """
    Load a dataset from a UTF-8, comma-separated CSV with a header row.

    Column kinds come from ``overrides``, then from the schema sidecar that
    ``write_csv`` leaves next to the file, then from inference:
    numeric-parseable columns are numeric, all others categorical with levels
    in first-appearance order. A categorical target makes a classification
    task, otherwise regression.

    Args:
        path: CSV file path
        target: Name of the target column
        overrides: Optional per-column kind hints
        name: Dataset name (defaults to the file stem)

    Returns:
        Validated Dataset
    """
    path = Path(path)
    overrides = dict(overrides or {})
    logger.info(f"Loading dataset from {path}")

    frame = _read_frame(path)
    header = list(frame.columns)
    if target not in header:
        raise MissingTargetError(f"target column '{target}' not found in {path.name}")
    unknown = set(overrides) - set(header)
    if unknown:
        raise DataError(f"type overrides for unknown columns: {sorted(unknown)}")
    declared = _declared_types(_read_schema(path))

    column_types: Dict[str, ColumnType] = {}
    for column in header:
        if column == target:
            continue
        column_types[column] = _resolve_type(
            frame[column], overrides.get(column), declared.get(column), column
        )

    target_type = _resolve_type(frame[target], overrides.get(target), declared.get(target), target)
    if target_type.is_categorical:
        task = Task.CLASSIFICATION
        classes = target_type.levels
    else:
        task = Task.REGRESSION
        classes = ()

    dataset = Dataset.from_frame(
        name=name or path.stem,
        frame=frame,
        target=target,
        column_types=column_types,
        task=task,
        classes=classes,
    )
    logger.info(
        f"Loaded {dataset.n:,} rows, {dataset.p} predictors ({dataset.task.value})"
    )
    return dataset


def load_feature_rows(path: Path) -> pd.DataFrame:
    """
    Load feature rows for prediction (no target required).

    Args:
        path: CSV file path

    Returns:
        DataFrame of raw string values
    """
    return _read_frame(Path(path))


def write_csv(dataset: Dataset, path: Path) -> None:
    """
    Write a dataset as CSV (features then target) plus its schema sidecar.

    ``load_csv`` on the written file returns the same dataset: column kinds,
    level order and classes come back from the sidecar.

    Args:
        dataset: Dataset to write
        path: Output CSV path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    columns = {}
    for column, column_type in dataset.column_types.items():
        if column_type.is_categorical:
            columns[column] = dataset.features[column].astype(str).to_numpy()
        else:
            columns[column] = [repr(float(v)) for v in dataset.features[column]]
    if dataset.task is Task.CLASSIFICATION:
        columns[dataset.target_name] = dataset.target.astype(str).to_numpy()
    else:
        columns[dataset.target_name] = [repr(float(v)) for v in dataset.target]

    pd.DataFrame(columns).to_csv(path, index=False)

    schema = {
        "name": dataset.name,
        "target": dataset.target_name,
        "task": dataset.task.value,
        "classes": list(dataset.classes),
        "columns": [
            {"name": column, "kind": column_type.kind.value, "levels": list(column_type.levels)}
            for column, column_type in dataset.column_types.items()
        ],
    }
    with open(schema_path(path), "w", encoding="utf-8") as f:
        yaml.safe_dump(schema, f, sort_keys=False)
    logger.info(f"Wrote {dataset.n:,} rows to {path}")


def kind_overrides(categorical: Sequence[str] = (), numeric: Sequence[str] = ()) -> Dict[str, ColumnKind]:
    """Build an overrides mapping from column-name lists."""
    overrides = {column: ColumnKind.CATEGORICAL for column in categorical}
    overrides.update({column: ColumnKind.NUMERIC for column in numeric})
    return overrides
