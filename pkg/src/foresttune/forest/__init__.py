"""Random-forest engine: hyperparameters, split search, trees and ensembles."""

from foresttune.forest.ensemble import (
    Forest,
    oob_predict,
    oob_proba,
    predict,
    predict_proba,
    train,
)
from foresttune.forest.model_io import load_model, save_model
from foresttune.forest.params import HyperParams, SplitKind, SplitRule
from foresttune.forest.splitting import best_split, gini_impurity, split_gain
from foresttune.forest.tree import draw_bag

__all__ = [
    "Forest",
    "HyperParams",
    "SplitKind",
    "SplitRule",
    "best_split",
    "draw_bag",
    "gini_impurity",
    "load_model",
    "oob_predict",
    "oob_proba",
    "predict",
    "predict_proba",
    "save_model",
    "split_gain",
    "train",
]
