"""Downstream learning on top of a frozen skill policy.

A high-level SAC agent observes the state plus the task's instruction
vector and emits a skill every K environment steps; the frozen low-level
policy executes that skill for K steps and the summed task reward is the
high-level reward.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import torch

from agents.replay_buffer import ReplayBuffer
from agents.sac_agent import SacAgent
from envs import BaseEnv, DownstreamTask, Transition, downstream_reward, make_task
from monitoring import RunLogger
from tensormath import child_seed, seed_everything, torch_generator
from training.checkpointing import Bundle, env_from_config, torch_dtype
from validation.schemas import CurveSchema, HrlConfig

logger = logging.getLogger(__name__)


@dataclass
class HrlStep:
    observation: np.ndarray
    high_action: np.ndarray
    skill: np.ndarray
    next_observation: np.ndarray
    next_state: np.ndarray
    reward: float
    env_steps: int
    done: bool


def high_observation(state: np.ndarray, task: DownstreamTask) -> np.ndarray:
    return np.concatenate([np.asarray(state, dtype=np.float64), task.instruction()])


def skill_from_action(high_action: np.ndarray, skill_range: float) -> np.ndarray:
    """Scale a tanh-space action onto the skill box [−range, range]^{ND}."""
    return np.clip(skill_range * np.asarray(high_action), -skill_range, skill_range)


def hrl_step(
    high: SacAgent,
    low: SacAgent,
    env: BaseEnv,
    task: DownstreamTask,
    state: np.ndarray,
    steps_per_skill: int = 5,
    skill_range: float = 1.5,
    generator: Optional[torch.Generator] = None,
) -> HrlStep:
    """One high-level decision: pick z, run the low-level policy for up to
    `steps_per_skill` env steps (fewer if the episode ends)."""
    observation = high_observation(state, task)
    high_action = high.act(observation, np.zeros(0), stochastic=True, generator=generator)
    skill = skill_from_action(high_action, skill_range)

    reward, steps, done = 0.0, 0, False
    while steps < steps_per_skill and not done:
        action = low.act(state, skill, stochastic=True, generator=generator)
        step = env.step(action)
        reward += downstream_reward(task, step.next_state, action, state)
        state = step.next_state
        steps += 1
        done = step.done
    return HrlStep(
        observation=observation,
        high_action=high_action,
        skill=skill,
        next_observation=high_observation(state, task),
        next_state=state,
        reward=reward,
        env_steps=steps,
        done=done,
    )


def build_high_level(bundle: Bundle, task: DownstreamTask, config: HrlConfig, seed: int) -> SacAgent:
    seed_everything(child_seed(seed, 3))
    return SacAgent(
        bundle.env.observation_dim + task.instruction_dim,
        0,
        bundle.prior.skill_dim,
        hidden=config.hidden,
        hidden_layers=config.hidden_layers,
        learning_rate=config.learning_rate,
        gamma=config.gamma,
        tau=config.tau,
        init_alpha=config.init_alpha,
        dtype=torch_dtype(bundle.config),
        seed=child_seed(seed, 4),
        name="high-level",
    )


def train_downstream(
    bundle: Bundle,
    task_name: str,
    config: HrlConfig,
    seed: int = 0,
    epochs: Optional[int] = None,
    run_logger: Optional[RunLogger] = None,
) -> pd.DataFrame:
    """SAC on the high-level MDP; returns one (epoch, mean_return) row per
    epoch. The bundle's skill policy is frozen for the whole run."""
    task = make_task(task_name)
    env = env_from_config(bundle.config)
    task.check_env(env)
    if task.env_overrides:
        env = env_from_config(bundle.config, **task.env_overrides)
    epochs = config.epochs if epochs is None else epochs

    low = bundle.agent
    low.freeze()
    high = build_high_level(bundle, task, config, seed)
    buffer = ReplayBuffer(
        env.observation_dim + task.instruction_dim, bundle.prior.skill_dim, 0, capacity=config.buffer_capacity
    )
    rng = np.random.default_rng(child_seed(seed, 5))

    rows: List[Dict[str, float]] = []
    env_steps = 0
    for epoch in range(epochs):
        returns = []
        for episode in range(config.episodes_per_epoch):
            episode_seed = child_seed(seed, epoch, episode)
            state = env.reset(episode_seed)
            task.reset(env, state, np.random.default_rng(child_seed(episode_seed, 1)))
            generator = torch_generator(child_seed(episode_seed, 2))
            total, done = 0.0, False
            while not done:
                result = hrl_step(
                    high, low, env, task, state, config.steps_per_skill, config.skill_range, generator=generator
                )
                buffer.add(
                    Transition(
                        result.observation,
                        result.high_action,
                        result.next_observation,
                        np.zeros(0),
                        done=False,
                        reward=result.reward,
                    )
                )
                total += result.reward
                env_steps += result.env_steps
                state, done = result.next_state, result.done
            returns.append(total)

        losses = high.update(
            buffer, batch_size=min(config.batch_size, len(buffer)), grad_steps=config.grad_steps, rng=rng
        )
        mean_return = float(np.mean(returns))
        rows.append(
            {"epoch": epoch, "mean_return": mean_return, "env_steps": env_steps, "critic_loss": losses["critic_loss"]}
        )
        if run_logger:
            run_logger.downstream_epoch(seed, epoch, mean_return)
        logger.debug("downstream seed %d epoch %d: return %.3f", seed, epoch, mean_return)

    curve = pd.DataFrame(rows, columns=["epoch", "mean_return", "env_steps", "critic_loss"])
    return CurveSchema.validate(curve) if len(curve) else curve


def aggregate_curves(curves: Sequence[pd.DataFrame]) -> pd.DataFrame:
    """Per-epoch mean and std of mean_return across seeds."""
    stacked = pd.concat(
        [c[["epoch", "mean_return"]].assign(seed=i) for i, c in enumerate(curves)], ignore_index=True
    )
    grouped = stacked.groupby("epoch")["mean_return"]
    aggregate = pd.DataFrame(
        {
            "mean_return": grouped.mean(),
            "std_return": grouped.std(ddof=0),
            "n_seeds": grouped.count(),
        }
    ).reset_index()
    return aggregate


def run_downstream(
    bundle: Bundle,
    task_name: str,
    config: HrlConfig,
    out_dir: Path,
    seeds: Optional[Sequence[int]] = None,
    epochs: Optional[int] = None,
    run_logger: Optional[RunLogger] = None,
) -> Dict[str, Path]:
    """One curve CSV per seed plus `curve_aggregate.csv`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = list(range(config.seeds)) if seeds is None else list(seeds)

    frozen = {name: p.detach().clone() for name, p in bundle.agent.nets.named_parameters()}
    paths: Dict[str, Path] = {}
    curves = []
    for seed in seeds:
        curve = train_downstream(bundle, task_name, config, seed=seed, epochs=epochs, run_logger=run_logger)
        path = out_dir / f"curve_seed{seed}.csv"
        curve.to_csv(path, index=False)
        paths[f"seed{seed}"] = path
        curves.append(curve)
    for name, p in bundle.agent.nets.named_parameters():
        if not torch.equal(p, frozen[name]):
            raise RuntimeError(f"low-level parameter {name} changed during downstream training")

    aggregate_path = out_dir / "curve_aggregate.csv"
    aggregate_curves(curves).to_csv(aggregate_path, index=False)
    paths["aggregate"] = aggregate_path
    logger.info("Downstream %s: %d seeds written to %s", task_name, len(seeds), out_dir)
    return paths
