import json

import numpy as np
import pandas as pd
import pytest

from monitoring import MetricsWriter, RunLogger, RunManifest
from monitoring.run_logger import read_events


def test_events_are_json_lines(tmp_path):
    run_logger = RunLogger(tmp_path)

    run_logger.run_started("pretrain", "abc123", seed=0)
    run_logger.epoch_completed(0, {"mean_reward": 0.5})
    run_logger.divergence("nan in critic", epoch=3, step=7)
    run_logger.close()

    events = read_events(tmp_path)
    assert [e["event_type"] for e in events] == ["run_started", "epoch_completed", "divergence"]
    assert events[1]["metrics"] == {"mean_reward": 0.5}
    assert events[2]["epoch"] == 3
    assert all("timestamp" in e for e in events)


def test_events_accept_numpy_values(tmp_path):
    run_logger = RunLogger(tmp_path)
    run_logger.eval_completed("coverage", {"counts": np.array([1, 2])})
    run_logger.close()

    assert read_events(tmp_path)[0]["summary"] == {"counts": [1, 2]}


def test_read_events_without_log(tmp_path):
    assert read_events(tmp_path) == []


def test_metrics_writer_flushes_csv(tmp_path):
    writer = MetricsWriter(tmp_path / "metrics.csv")
    writer.append({"epoch": 0, "alpha": 0.1})
    writer.append({"epoch": 1, "alpha": 0.09, "extra": 2.0})

    path = writer.flush()

    frame = pd.read_csv(path)
    assert list(frame.columns) == ["epoch", "alpha", "extra"]
    assert frame["epoch"].tolist() == [0, 1]
    assert not (tmp_path / "metrics.csv.tmp").exists()


def test_metrics_writer_rejects_non_monotone_epochs(tmp_path):
    writer = MetricsWriter(tmp_path / "metrics.csv")
    writer.append({"epoch": 2})

    with pytest.raises(ValueError):
        writer.append({"epoch": 2})


def test_manifest_round_trip(tmp_path):
    manifest = RunManifest(command="pretrain", config_hash="f" * 64, seed=3, n_factors=2)
    manifest.add_artifact("metrics", tmp_path / "metrics.csv")

    manifest.write(tmp_path)
    restored = RunManifest.read(tmp_path)

    assert restored == manifest
    assert restored.artifacts["metrics"].endswith("metrics.csv")
    assert json.loads((tmp_path / "run_manifest.json").read_text())["seed"] == 3


def test_manifest_records_code_version():
    manifest = RunManifest(command="eval", config_hash="0", seed=0)

    assert isinstance(manifest.code_version, str)
    assert manifest.code_version
