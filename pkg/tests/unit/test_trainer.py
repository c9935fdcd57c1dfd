import numpy as np
import pandas as pd
import pytest
import torch

from skills import SkillPrior, sample_skill
from tensormath.errors import TrainingDivergenceError
from training import SusdTrainer, collect_episode, load_bundle


def test_epoch_phases_run_in_order(tiny_config):
    trainer = SusdTrainer(tiny_config())

    trainer.pretrain_epoch()
    trainer.pretrain_epoch()

    assert trainer.phase_trace == [["collect", "density", "phi", "lambda", "sac"]] * 2


def test_unweighted_ablation_skips_density_fit(tiny_config):
    trainer = SusdTrainer(tiny_config("trainer.ablation=susd-w"))

    row = trainer.pretrain_epoch()

    assert trainer.phase_trace == [["collect", "phi", "lambda", "sac"]]
    assert not trainer.density.fitted
    assert all(row[f"weight_{name}"] == 1.0 for name in trainer.spec.names)


def test_single_embedding_ablation_has_one_factor(tiny_config):
    trainer = SusdTrainer(tiny_config("trainer.ablation=susd-wf", "skills.factorization=native"))

    row = trainer.pretrain_epoch()

    assert trainer.spec.n_factors == 1
    assert trainer.prior.skill_dim == trainer.config.skills.dim
    assert row["weight_state"] == 1.0


def test_skill_is_fixed_within_an_episode(tiny_config):
    trainer = SusdTrainer(tiny_config())
    skill = sample_skill(SkillPrior(trainer.spec.n_factors, 2), np.random.default_rng(0))

    transitions = collect_episode(trainer.env, trainer.agent, skill, seed=3)

    assert len(transitions) == 10
    assert all(np.array_equal(t.skill, skill.flat()) for t in transitions)
    assert not any(t.done for t in transitions)
    for prev, nxt in zip(transitions, transitions[1:]):
        assert np.array_equal(prev.next_state, nxt.state)


def test_epoch_collects_episodes_into_buffer(tiny_config):
    trainer = SusdTrainer(tiny_config())

    trainer.pretrain_epoch()

    assert len(trainer.buffer) == 2 * 10
    assert trainer.env_steps == 20
    assert trainer.epoch == 1


def test_metrics_row_has_per_factor_columns(tiny_config):
    trainer = SusdTrainer(tiny_config())

    row = trainer.pretrain_epoch()

    for key in ("epoch", "env_steps", "mean_reward", "critic_loss", "actor_loss", "alpha", "density_nll"):
        assert key in row
    for name in trainer.spec.names:
        assert {f"delta_norm_{name}", f"lambda_{name}", f"weight_{name}"} <= set(row)
    assert row["epoch"] == 0
    assert row["alpha"] > 0


def test_training_is_deterministic_for_a_seed(tiny_config):
    rows = [pd.DataFrame([SusdTrainer(tiny_config()).pretrain_epoch()]) for _ in range(2)]

    pd.testing.assert_frame_equal(rows[0], rows[1])


def test_worker_count_does_not_change_collection(tiny_config):
    serial = SusdTrainer(tiny_config()).collect()
    parallel = SusdTrainer(tiny_config("trainer.num_workers=2")).collect()

    assert len(serial) == len(parallel) == 2
    for a, b in zip(serial, parallel):
        assert all(np.array_equal(x.action, y.action) for x, y in zip(a, b))
        assert all(np.array_equal(x.next_state, y.next_state) for x, y in zip(a, b))


def test_stored_rewards_when_relabeling_is_off(tiny_config):
    trainer = SusdTrainer(tiny_config("sac.relabel_rewards=false"))

    trainer.pretrain_epoch()

    batch = trainer.buffer.sample(8, np.random.default_rng(0))
    assert torch.isfinite(batch.rewards).all()


def test_divergence_reports_epoch(tiny_config):
    trainer = SusdTrainer(tiny_config())
    trainer.pretrain_epoch()
    with torch.no_grad():
        next(trainer.bank.nets[0].parameters()).fill_(float("nan"))

    with pytest.raises(TrainingDivergenceError) as info:
        trainer.pretrain_epoch()

    assert info.value.epoch == 1


def test_run_writes_metrics_and_checkpoints(tiny_config, tmp_path):
    trainer = SusdTrainer(tiny_config("trainer.checkpoint_every=1"))

    frame = trainer.run(tmp_path)

    assert list(frame["epoch"]) == [0, 1]
    assert (tmp_path / "metrics.csv").exists()
    assert (tmp_path / "checkpoints" / "epoch_000001").is_dir()
    assert (tmp_path / "checkpoints" / "epoch_000002").is_dir()
    restored = load_bundle(tmp_path / "checkpoints" / "final")
    assert restored.epoch == 2
    assert torch.equal(restored.bank.lambdas, trainer.bank.lambdas)


def test_pinned_multipliers_are_logged(tiny_config, caplog):
    trainer = SusdTrainer(tiny_config("env.name=pointnav", "skills.initial_lambda=0"))

    with caplog.at_level("WARNING", logger="training.pretrain"):
        row = trainer.pretrain_epoch()

    assert all(row[f"lambda_{name}"] == 0.0 for name in trainer.spec.names)
    assert "pinned at 0" in caplog.text
