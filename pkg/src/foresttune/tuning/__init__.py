"""Hyperparameter tuning: search space, SMBO, the OOB tuner and baselines."""

from foresttune.tuning.baselines import tune_grid_caret, tune_mtry_walk, tune_random
from foresttune.tuning.smbo import SmboHistory, run_smbo
from foresttune.tuning.space import ParamSpace, ParamSpec, decode, default_space, grid, sample_uniform
from foresttune.tuning.tuner import (
    TuneConfig,
    TuneResult,
    estimate_time,
    format_duration,
    format_recommendation,
    recommend,
    tune,
)
