"""Evaluation measures."""

from foresttune.metrics.measures import (
    AUC,
    BRIER_BINARY,
    BRIER_MULTICLASS,
    LOGLOSS,
    MEASURES,
    MMCE,
    MSE,
    EvaluationResult,
    Measure,
    auc,
    brier,
    evaluate,
    get_measure,
    logloss,
    mmce,
    mse,
)
