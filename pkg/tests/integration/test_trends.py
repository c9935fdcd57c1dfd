"""Trend-level miniatures on MultiParticle-mini and PointNav.

These train at the desk-scale defaults of configs/mini.yaml and take tens
of minutes on a CPU; they are deselected by default and run with

    pytest -m slow tests/integration/test_trends.py
"""

from pathlib import Path

import numpy as np
import pytest

from agents import ReplayBuffer, SacAgent
from envs import Transition, make_env
from evaluation import factor_decode, state_coverage
from tensormath import child_seed, seed_everything, torch_generator
from training import SusdTrainer
from validation.config import load_config

pytestmark = pytest.mark.slow

MINI = Path(__file__).resolve().parents[2] / "configs" / "mini.yaml"
SEEDS = (0, 1, 2)


@pytest.fixture(scope="module")
def pretrained(tmp_path_factory):
    """Full and single-embedding runs for every seed: {(ablation, seed): (trainer, metrics)}."""
    runs = {}
    for ablation in ("full", "susd-wf"):
        for seed in SEEDS:
            config = load_config(MINI, [f"trainer.ablation={ablation}", f"trainer.seed={seed}", "trainer.checkpoint_every=0"])
            trainer = SusdTrainer(config)
            frame = trainer.run(tmp_path_factory.mktemp(f"{ablation}-{seed}"))
            runs[(ablation, seed)] = (trainer, frame)
    return runs


def test_embedding_displacements_respect_the_constraint(pretrained):
    finals = []
    for seed in SEEDS:
        trainer, frame = pretrained[("full", seed)]
        lambdas = frame[[f"lambda_{n}" for n in trainer.spec.names]]
        assert (lambdas >= 0).all().all()
        finals.append(frame[[f"delta_norm_{n}" for n in trainer.spec.names]].iloc[-1].to_numpy())

    assert np.all(np.mean(finals, axis=0) <= 1.1)


def test_factored_skills_cover_more_of_the_worst_agent(pretrained):
    def worst_agent(ablation):
        counts = []
        for seed in SEEDS:
            trainer, _ = pretrained[(ablation, seed)]
            ev = trainer.config.eval
            counts.append(
                state_coverage(trainer.agent, trainer.env, trainer.prior, ev.coverage_steps, ev.resample_every, seed).min
            )
        return np.mean(counts)

    assert worst_agent("full") >= 1.5 * worst_agent("susd-wf")


def test_factored_embeddings_decode_better(pretrained):
    def mean_mse(ablation):
        errors = []
        for seed in SEEDS:
            trainer, _ = pretrained[(ablation, seed)]
            ev = trainer.config.eval
            report = factor_decode(
                trainer.bundle,
                steps=ev.decode_desk_steps,
                resample_every=ev.resample_every,
                epochs=ev.decode_epochs,
                batch_size=ev.decode_batch_size,
                learning_rate=ev.decode_learning_rate,
                seed=seed,
            )
            errors.append(report.mean_mse)
        return np.mean(errors)

    assert mean_mse("full") < mean_mse("susd-wf")


def _pointnav_returns(seed, epochs=200, goal=(5.0, 5.0)):
    """Flat SAC on PointNav with reward −‖position − goal‖, one episode per epoch."""
    seed_everything(seed)
    env = make_env("pointnav")
    agent = SacAgent(env.observation_dim, 0, env.action_dim, seed=child_seed(seed, 1), name="pointnav-sac")
    buffer = ReplayBuffer(env.observation_dim, env.action_dim, 0)
    rng = np.random.default_rng(seed)
    goal = np.asarray(goal)

    returns = []
    for epoch in range(epochs):
        state, total, done = env.reset(child_seed(seed, epoch)), 0.0, False
        generator = torch_generator(child_seed(seed, epoch, 1))
        while not done:
            action = agent.act(state, np.zeros(0), generator=generator)
            step = env.step(action)
            reward = -float(np.linalg.norm(step.next_state[0:2] - goal))
            buffer.add(Transition(state, action, step.next_state, np.zeros(0), reward=reward))
            total += reward
            state, done = step.next_state, step.done
        returns.append(total)
        agent.update(buffer, batch_size=min(256, len(buffer)), grad_steps=50, rng=rng)
    return np.array(returns)


def test_sac_learns_dense_goal_reward():
    returns = np.mean([_pointnav_returns(seed) for seed in SEEDS], axis=0)
    early, late = returns[9], returns[199]

    assert late - early >= 0.5 * abs(early)
