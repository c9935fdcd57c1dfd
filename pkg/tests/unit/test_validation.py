import json

import numpy as np
import pandas as pd

from envs import Transition
from monitoring import RunLogger, RunManifest
from validation.quality_checks import TransitionChecker
from validation.run_checks import check_run_dir, main


def _episode(n=3):
    states = np.arange(n + 1, dtype=float)[:, None].repeat(2, axis=1)
    z = np.array([1.0, -1.0])
    return [Transition(states[t], np.zeros(1), states[t + 1], z) for t in range(n)]


def test_valid_episode_passes():
    ok, errors = TransitionChecker(2, 1, 2).validate_episode(_episode())

    assert ok
    assert errors == []


def test_empty_episode_fails():
    ok, errors = TransitionChecker(2, 1, 2).validate_episode([])

    assert not ok
    assert "no transitions" in errors[0]


def test_checker_flags_each_problem():
    episode = _episode()
    episode[0].action = np.array([1.5])
    episode[1].skill = np.array([0.0, 0.0])
    episode[2].state = np.array([9.0, 9.0])
    episode[2].next_state = np.array([np.nan, 0.0])

    ok, errors = TransitionChecker(2, 1, 2).validate_episode(episode)

    assert not ok
    assert any("outside" in e for e in errors)
    assert any("Skill changes" in e for e in errors)
    assert any("does not continue" in e for e in errors)
    assert any("non-finite" in e for e in errors)


def _write_run(run_dir, metrics=None):
    RunManifest(command="pretrain", config_hash="0", seed=0).write(run_dir)
    run_logger = RunLogger(run_dir)
    run_logger.run_started("pretrain", "0", 0)
    run_logger.close()
    frame = metrics if metrics is not None else pd.DataFrame(
        {
            "epoch": [0, 1],
            "env_steps": [10, 20],
            "mean_reward": [0.1, 0.2],
            "critic_loss": [1.0, 0.5],
            "actor_loss": [0.3, 0.2],
            "alpha": [0.1, 0.09],
            "density_nll": [float("nan"), 2.0],
        }
    )
    frame.to_csv(run_dir / "metrics.csv", index=False)


def test_well_formed_run_dir_passes(tmp_path):
    _write_run(tmp_path)
    pd.DataFrame({"epoch": [0, 1], "mean_return": [0.0, 1.0]}).to_csv(tmp_path / "curve_seed0.csv", index=False)

    assert check_run_dir(tmp_path) == []
    assert main([str(tmp_path)]) == 0


def test_missing_manifest_is_reported(tmp_path):
    assert any("run_manifest.json" in e for e in check_run_dir(tmp_path))
    assert main([str(tmp_path)]) == 1


def test_bad_metrics_are_reported(tmp_path):
    _write_run(tmp_path, pd.DataFrame({"epoch": [1, 0], "env_steps": [0, 0], "mean_reward": [0, 0],
                                       "critic_loss": [0, 0], "actor_loss": [0, 0], "alpha": [0.1, 0.1],
                                       "density_nll": [0, 0]}))

    assert any("monotone" in e for e in check_run_dir(tmp_path))


def test_non_positive_alpha_fails_schema(tmp_path):
    frame = pd.DataFrame({"epoch": [0], "env_steps": [0], "mean_reward": [0.0], "critic_loss": [0.0],
                          "actor_loss": [0.0], "alpha": [0.0], "density_nll": [0.0]})
    _write_run(tmp_path, frame)

    assert any("metrics schema" in e for e in check_run_dir(tmp_path))


def test_corrupt_events_log_is_reported(tmp_path):
    _write_run(tmp_path)
    with open(tmp_path / "events.jsonl", "a") as f:
        f.write("{not json\n")

    assert any("events log" in e for e in check_run_dir(tmp_path))


def test_manifest_on_disk_is_json(tmp_path):
    _write_run(tmp_path)

    assert json.loads((tmp_path / "run_manifest.json").read_text())["command"] == "pretrain"
