import json
from pathlib import Path

import pandas as pd
import pytest

from monitoring import RunManifest
from monitoring.run_logger import read_events
from scripts import cli
from tensormath.errors import TrainingDivergenceError
from training import SusdTrainer
from validation.run_checks import check_run_dir


@pytest.fixture()
def output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("SUSD_OUTPUT_ROOT", str(tmp_path))
    return tmp_path


def _run_dirs(root: Path, prefix: str):
    return sorted(p for p in root.iterdir() if p.name.startswith(prefix))


@pytest.fixture()
def pretrained(output_root, tiny_cli_args):
    assert cli.main(["pretrain", "--epochs", "1"] + tiny_cli_args) == cli.EXIT_OK
    (run_dir,) = _run_dirs(output_root, "pretrain-")
    return run_dir


def test_pretrain_writes_a_complete_run(pretrained):
    for name in ("config.yaml", "run_manifest.json", "events.jsonl", "metrics.csv"):
        assert (pretrained / name).exists(), name
    assert (pretrained / "checkpoints" / "final" / "bundle.json").exists()
    assert check_run_dir(pretrained) == []
    manifest = RunManifest.read(pretrained)
    assert manifest.command == "pretrain"
    assert manifest.n_factors == 3
    events = [e["event_type"] for e in read_events(pretrained)]
    assert events[0] == "run_started"
    assert "epoch_completed" in events


def test_reruns_get_fresh_directories(output_root, tiny_cli_args):
    for _ in range(2):
        assert cli.main(["pretrain", "--epochs", "1"] + tiny_cli_args) == cli.EXIT_OK

    assert len(_run_dirs(output_root, "pretrain-")) == 2


def test_single_embedding_ablation_records_one_factor(output_root, tiny_cli_args):
    assert cli.main(["pretrain", "--epochs", "1", "--ablation", "susd-wf"] + tiny_cli_args) == cli.EXIT_OK

    (run_dir,) = _run_dirs(output_root, "pretrain-")
    assert RunManifest.read(run_dir).n_factors == 1


def test_unknown_config_key_exits_2(output_root):
    assert cli.main(["pretrain", "--set", "trainer.bogus=1"]) == cli.EXIT_CONFIG


def test_unknown_env_exits_2(output_root, tiny_cli_args):
    assert cli.main(["pretrain", "--env", "nowhere"] + tiny_cli_args) == cli.EXIT_CONFIG


def test_factorization_for_other_env_exits_2(output_root, tiny_cli_args):
    assert cli.main(["pretrain", "--factors", "gunner-over4"] + tiny_cli_args) == cli.EXIT_CONFIG


def test_divergence_exits_3(output_root, tiny_cli_args, monkeypatch):
    def diverge(self):
        raise TrainingDivergenceError("non-finite loss", step=1).at_epoch(self.epoch)

    monkeypatch.setattr(SusdTrainer, "pretrain_epoch", diverge)

    assert cli.main(["pretrain", "--epochs", "1"] + tiny_cli_args) == cli.EXIT_DIVERGENCE
    (run_dir,) = _run_dirs(output_root, "pretrain-")
    assert any(e["event_type"] == "divergence" for e in read_events(run_dir))
    assert (run_dir / "run_manifest.json").exists()


def test_downstream_writes_curve_per_seed(pretrained, output_root):
    code = cli.main(["downstream", "--checkpoint", str(pretrained / "checkpoints" / "final"),
                     "--task", "seq-easy", "--seeds", "2", "--epochs", "1"])

    assert code == cli.EXIT_OK
    (run_dir,) = _run_dirs(output_root, "downstream-")
    assert (run_dir / "curve_seed0.csv").exists()
    assert (run_dir / "curve_seed1.csv").exists()
    assert len(pd.read_csv(run_dir / "curve_aggregate.csv")) == 1
    assert check_run_dir(run_dir) == []


def test_downstream_unknown_task_exits_2(pretrained, output_root):
    code = cli.main(["downstream", "--checkpoint", str(pretrained / "checkpoints" / "final"), "--task", "fly"])

    assert code == cli.EXIT_CONFIG
    assert _run_dirs(output_root, "downstream-") == []


def test_downstream_task_longer_than_env_exits_2(pretrained, output_root):
    code = cli.main(["downstream", "--checkpoint", str(pretrained / "checkpoints" / "final"), "--task", "seq-hard"])

    assert code == cli.EXIT_CONFIG
    assert _run_dirs(output_root, "downstream-") == []


def test_eval_coverage_publishes_report(pretrained, output_root, capsys):
    code = cli.main(["eval", "--checkpoint", str(pretrained / "checkpoints" / "final"), "--kind", "coverage"])

    assert code == cli.EXIT_OK
    (run_dir,) = _run_dirs(output_root, "eval-coverage-")
    rows = pd.read_csv(run_dir / "coverage.csv")
    assert "worst_agent" in set(rows["factor"])
    summary = json.loads((run_dir / "coverage_summary.json").read_text())
    assert summary["kind"] == "coverage"
    assert "coverage report" in capsys.readouterr().out


def test_eval_zeroshot_on_multiparticle_exits_2(pretrained):
    code = cli.main(["eval", "--checkpoint", str(pretrained / "checkpoints" / "final"), "--kind", "zeroshot"])

    assert code == cli.EXIT_CONFIG


def test_eval_zeroshot_on_discrete_checkpoint_exits_2(output_root, tiny_cli_args):
    args = ["pretrain", "--epochs", "1", "--env", "pointnav", "--set", "skills.mode=discrete"]
    assert cli.main(args + tiny_cli_args) == cli.EXIT_OK
    (run_dir,) = _run_dirs(output_root, "pretrain-")

    code = cli.main(["eval", "--checkpoint", str(run_dir / "checkpoints" / "final"), "--kind", "zeroshot"])

    assert code == cli.EXIT_CONFIG


def test_eval_rejects_unknown_kind(pretrained):
    with pytest.raises(SystemExit) as info:
        cli.main(["eval", "--checkpoint", str(pretrained), "--kind", "everything"])

    assert info.value.code == 2


def test_missing_checkpoint_exits_2(output_root):
    assert cli.main(["eval", "--checkpoint", str(output_root / "nope"), "--kind", "coverage"]) == cli.EXIT_CONFIG


def test_dump_trajectories(pretrained, output_root):
    code = cli.main(["dump-trajectories", "--checkpoint", str(pretrained / "checkpoints" / "final"), "--episodes", "2"])

    assert code == cli.EXIT_OK
    (run_dir,) = _run_dirs(output_root, "dump-trajectories-")
    lines = (run_dir / "trajectories.jsonl").read_text().splitlines()
    assert len(lines) == 2 * 10
    first = json.loads(lines[0])
    assert first["episode"] == 0 and first["t"] == 0


def test_dump_trajectories_skips_rejected_episodes(pretrained, output_root, monkeypatch):
    calls = []

    def reject_first(self, transitions):
        calls.append(len(transitions))
        if len(calls) == 1:
            return False, ["Skill changes within the episode"]
        return True, []

    monkeypatch.setattr(cli.TransitionChecker, "validate_episode", reject_first)
    code = cli.main(["dump-trajectories", "--checkpoint", str(pretrained / "checkpoints" / "final"), "--episodes", "2"])

    assert code == cli.EXIT_OK
    (run_dir,) = _run_dirs(output_root, "dump-trajectories-")
    lines = (run_dir / "trajectories.jsonl").read_text().splitlines()
    assert len(lines) == 10
    assert {json.loads(line)["episode"] for line in lines} == {1}
    rejected = [e for e in read_events(run_dir) if e["event_type"] == "episode_rejected"]
    assert len(rejected) == 1
    assert rejected[0]["episode"] == 0
    assert rejected[0]["issues"] == ["Skill changes within the episode"]
