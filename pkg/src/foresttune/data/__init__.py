"""Datasets: loading, validation, cross-validation plans and synthetic fixtures."""

from foresttune.data.cv import CvPlan, make_cv_plan
from foresttune.data.dataset import (
    ColumnKind,
    ColumnType,
    Dataset,
    Task,
    load_csv,
    load_feature_rows,
    write_csv,
)
from foresttune.data.synthetic import synth_monks2, synth_sparse_signal
