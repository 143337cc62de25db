"""Configuration management using environment variables."""

import os
from pathlib import Path
from typing import Optional

import joblib
from dotenv import load_dotenv

load_dotenv()


class Config:
    """Project configuration loaded from environment variables."""

    # Paths
    PROJECT_ROOT: Path = Path(__file__).parent.parent.parent
    OUTPUT_DIR: Path = PROJECT_ROOT / os.getenv("FORESTTUNE_OUTPUT_DIR", "outputs")
    MODELS_DIR: Path = PROJECT_ROOT / os.getenv("FORESTTUNE_MODELS_DIR", "models")
    MLFLOW_TRACKING_URI: str = os.getenv("MLFLOW_TRACKING_URI", "./mlruns")

    # Logging
    LOG_LEVEL: str = os.getenv("FORESTTUNE_LOG_LEVEL", "INFO").upper()

    # Random seed
    RANDOM_SEED: int = int(os.getenv("FORESTTUNE_SEED", "42"))

    # Parallel workers (0 means every available core)
    WORKERS: int = int(os.getenv("FORESTTUNE_WORKERS", "0")) or joblib.cpu_count()

    # Search space
    GRID_CAP: int = int(os.getenv("FORESTTUNE_GRID_CAP", "100000"))

    # Tuning defaults
    TUNE_NUM_TREES: int = int(os.getenv("FORESTTUNE_TUNE_NUM_TREES", "2000"))
    TUNE_WARMUP: int = int(os.getenv("FORESTTUNE_TUNE_WARMUP", "30"))
    TUNE_ITERS: int = int(os.getenv("FORESTTUNE_TUNE_ITERS", "70"))
    SMBO_CANDIDATES: int = int(os.getenv("FORESTTUNE_SMBO_CANDIDATES", "1000"))

    @classmethod
    def ensure_directories(cls) -> None:
        """Create necessary directories if they don't exist."""
        for dir_path in [cls.OUTPUT_DIR, cls.MODELS_DIR]:
            dir_path.mkdir(parents=True, exist_ok=True)


config = Config()


def resolve_seed(cli_seed: Optional[int] = None) -> int:
    """
    Resolve the seed for a run.

    Args:
        cli_seed: Seed passed on the command line, if any

    Returns:
        The CLI seed, else FORESTTUNE_SEED from the environment, else the configured default
    """
    if cli_seed is not None:
        return int(cli_seed)
    env_seed = os.getenv("FORESTTUNE_SEED")
    if env_seed:
        return int(env_seed)
    return config.RANDOM_SEED
