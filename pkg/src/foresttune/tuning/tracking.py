"""Optional MLflow tracking of tuning runs."""

import math
import tempfile
from pathlib import Path
from typing import Optional

import mlflow

from foresttune.config import config
from foresttune.data.dataset import Dataset
from foresttune.logging_utils import setup_logger
from foresttune.tuning.tuner import TuneResult

logger = setup_logger(__name__)

EXPERIMENT_NAME = "foresttune_tuning"


def track_tuning(
    result: TuneResult,
    dataset: Dataset,
    model_path: Optional[Path] = None,
    experiment: str = EXPERIMENT_NAME,
) -> str:
    """
    Log a tuning run to MLflow: settings, recommended parameters, the OOB
    objective, the per-evaluation objective trace and artifacts.

    Args:
        result: Tuning result
        dataset: Tuned dataset
        model_path: Saved model file to attach
        experiment: MLflow experiment name

    Returns:
        MLflow run id
    """
    mlflow.set_tracking_uri(config.MLFLOW_TRACKING_URI)
    mlflow.set_experiment(experiment)

    history = result.history
    with mlflow.start_run(run_name=dataset.name) as run:
        mlflow.log_param("dataset", dataset.name)
        mlflow.log_param("measure", result.measure.name)
        mlflow.log_param("warmup", history.warmup)
        mlflow.log_param("iters", history.iters)
        mlflow.log_param("seed", history.seed)
        mlflow.log_param("tuned", ",".join(result.space.names))
        for name, value in result.recommended.to_dict().items():
            mlflow.log_param(f"recommended_{name}", value)

        if math.isfinite(result.objective):
            mlflow.log_metric(f"oob_{result.measure.name}", result.objective)
        mlflow.log_metric("exec_time", result.elapsed)
        mlflow.log_metric("failed_evaluations", history.failures)
        for point in history.points:
            mlflow.log_metric("objective", point.objective, step=point.iteration)

        with tempfile.TemporaryDirectory() as tmp:
            history_path = Path(tmp) / "history.csv"
            history.to_frame().to_csv(history_path, index=False)
            mlflow.log_artifact(str(history_path))
        if model_path is not None:
            mlflow.log_artifact(str(model_path))

        logger.info(f"Tracked tuning run {run.info.run_id} in experiment '{experiment}'")
        return run.info.run_id
