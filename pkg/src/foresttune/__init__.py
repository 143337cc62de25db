"""foresttune: random forests with every hyperparameter exposed, plus OOB-driven tuning."""

__version__ = "0.1.0"
