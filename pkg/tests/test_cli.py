"""Tests for the foresttune command line."""

import json

import pandas as pd
import pytest

from foresttune.cli import run_cli
from foresttune.data.dataset import write_csv
from foresttune.data.synthetic import synth_blobs
from foresttune.forest.model_io import MAGIC


@pytest.fixture
def blobs_csv(tmp_path):
    """Binary blobs written as CSV with target column y."""
    path = tmp_path / "blobs.csv"
    write_csv(synth_blobs(60, 2, 3, seed=0), path)
    return path


def test_usage_errors(capsys):
    """Test exit code 2 on missing or unknown subcommands."""
    assert run_cli([]) == 2
    assert run_cli(["grow-a-jungle"]) == 2
    assert run_cli(["train"]) == 2
    assert "usage: foresttune" in capsys.readouterr().err


def test_synth_writes_csv(tmp_path):
    """Test the monks2 fixture export."""
    out = tmp_path / "monks2.csv"
    assert run_cli(["synth", "monks2", "--out", str(out)]) == 0

    frame = pd.read_csv(out)
    assert len(frame) == 432
    assert list(frame.columns) == ["a1", "a2", "a3", "a4", "a5", "a6", "y"]


def test_synth_output_trains_a_classifier(tmp_path):
    """Test that synth output keeps its categorical schema through train."""
    data = tmp_path / "monks2.csv"
    model = tmp_path / "monks2.model"
    assert run_cli(["synth", "monks2", "--out", str(data)]) == 0
    assert data.with_suffix(".schema.yaml").exists()

    code = run_cli([
        "train", "--data", str(data), "--target", "y",
        "--num-trees", "5", "--seed", "0", "--workers", "1", "--out", str(model),
    ])

    assert code == 0
    body = json.loads(model.read_text(encoding="utf-8").splitlines()[1])
    assert body["task"] == "classification"
    assert body["classes"] == ["0", "1"]
    assert {column["kind"] for column in body["schema"]} == {"categorical"}


def test_train_then_predict(tmp_path, capsys, blobs_csv):
    """Test saving a model and predicting with probabilities to stdout."""
    model = tmp_path / "blobs.model"
    code = run_cli([
        "train", "--data", str(blobs_csv), "--target", "y",
        "--num-trees", "10", "--seed", "1", "--workers", "1", "--out", str(model),
    ])
    assert code == 0
    assert model.read_text(encoding="utf-8").startswith(MAGIC)

    capsys.readouterr()
    assert run_cli(["predict", "--model", str(model), "--data", str(blobs_csv), "--proba", "--workers", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "prediction"
    assert sorted(header[1:]) == ["prob_c0", "prob_c1"]
    assert len(lines) == 61


def test_missing_file_is_a_data_error(tmp_path, capsys):
    """Test exit code 1 and the module-tagged error line."""
    code = run_cli(["train", "--data", str(tmp_path / "nope.csv"), "--target", "y", "--workers", "1"])

    assert code == 1
    assert "foresttune: error: [data]" in capsys.readouterr().err


def test_tune_prints_recommendation(tmp_path, capsys):
    """Test a tiny tuning run on monks2."""
    data = tmp_path / "monks2.csv"
    run_cli(["synth", "monks2", "--out", str(data)])
    history = tmp_path / "history.csv"
    capsys.readouterr()

    code = run_cli([
        "tune", "--data", str(data), "--target", "y",
        "--num-trees", "10", "--warmup", "3", "--iters", "1", "--candidates", "20",
        "--seed", "2", "--workers", "1",
        "--out", str(tmp_path / "tuned.model"), "--history", str(history),
    ])

    assert code == 0
    assert "Recommended parameter settings:" in capsys.readouterr().out
    assert (tmp_path / "tuned.model").exists()
    assert len(pd.read_csv(history)) == 4


def test_estimate_time(capsys, blobs_csv):
    """Test the runtime estimate line."""
    code = run_cli([
        "estimate-time", "--data", str(blobs_csv), "--target", "y",
        "--num-trees", "5", "--warmup", "2", "--iters", "2", "--workers", "1",
    ])

    assert code == 0
    assert "Approximated time for tuning:" in capsys.readouterr().out


def test_oob_curve_and_importance_tables(tmp_path, blobs_csv):
    """Test the CSV layouts of oob-curve and importance."""
    curve = tmp_path / "curve.csv"
    importance = tmp_path / "importance.csv"
    common = ["--data", str(blobs_csv), "--target", "y", "--num-trees", "20", "--seed", "0", "--workers", "1"]

    assert run_cli(["oob-curve", *common, "--step", "5", "--measures", "mmce,brier", "--out", str(curve)]) == 0
    assert run_cli(["importance", *common, "--out", str(importance)]) == 0

    frame = pd.read_csv(curve)
    assert list(frame.columns) == ["ntree", "measure", "value"]
    assert frame["ntree"].tolist() == [5, 10, 15, 20, 5, 10, 15, 20]
    table = pd.read_csv(importance)
    assert list(table.columns) == ["feature", "importance", "se"]
    assert table["feature"].tolist() == ["x1", "x2", "x3"]


def test_unknown_measure_fails(capsys, blobs_csv):
    """Test that a bad measure name is reported, not raised."""
    code = run_cli(["tune", "--data", str(blobs_csv), "--target", "y", "--measure", "accuracy", "--workers", "1"])

    assert code == 1
    assert "foresttune: error: [metrics]" in capsys.readouterr().err
