"""Pretraining loop for factor-structured skill discovery.

One epoch runs, in this order:
    1. collect `episodes_per_epoch` episodes, one skill per episode
    2. fit the density model on the freshly collected transitions
    3. Adam ascent on every per-factor embedding objective
    4. gradient ascent on every multiplier, clamped at 0
    5. SAC updates with the weighted intrinsic reward, relabeled per batch

The susd-w ablation fixes every curiosity weight to 1; susd-wf does the
same over a single embedding of the whole state.
"""

import copy
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import torch

from agents.replay_buffer import ReplayBuffer, TransitionBatch
from density.gaussian import curiosity_weights, fit
from envs import BaseEnv, Transition
from monitoring import MetricsWriter, RunLogger
from skills import DualUpdater, SkillVector, displacement_norms, sample_skill, total_intrinsic_reward
from tensormath import AdamState, child_seed, torch_generator
from tensormath.errors import TrainingDivergenceError
from validation.schemas import ExperimentConfig

from .checkpointing import Bundle, build_bundle, save_bundle

logger = logging.getLogger(__name__)

PHASES = ("collect", "density", "phi", "lambda", "sac")
COLLAPSE_NORM = 1e-6


def collect_episode(
    env: BaseEnv, agent, skill: SkillVector, seed: int, generator: Optional[torch.Generator] = None
) -> List[Transition]:
    """Roll out one episode with `skill` held fixed."""
    state = env.reset(seed)
    z = skill.flat()
    transitions: List[Transition] = []
    while True:
        action = agent.act(state, z, stochastic=True, generator=generator)
        step = env.step(action)
        transitions.append(Transition(state, action, step.next_state, z, done=False))
        state = step.next_state
        if step.done:
            return transitions


class SusdTrainer:
    def __init__(self, config: ExperimentConfig, env: Optional[BaseEnv] = None):
        if config.trainer.ablation == "susd-wf" and config.skills.factorization != "single":
            config = config.model_copy(deep=True)
            config.skills.factorization = "single"
        self.config = config
        self.bundle: Bundle = build_bundle(config, env=env)
        self.env = self.bundle.env
        self.spec = self.bundle.spec
        self.prior = self.bundle.prior
        self.bank = self.bundle.bank
        self.density = self.bundle.density
        self.agent = self.bundle.agent
        self.dtype = self.bank.dtype

        self.buffer = ReplayBuffer(
            self.env.observation_dim, self.env.action_dim, self.prior.skill_dim, capacity=config.sac.buffer_capacity
        )
        self.updater = DualUpdater(self.bank, config.skills.learning_rate, config.skills.lambda_learning_rate)
        self.density_optimizer = AdamState(self.density.net, learning_rate=config.density.learning_rate)
        self.rng = np.random.default_rng(child_seed(config.trainer.seed, 2))
        self.epoch = 0
        self.env_steps = 0
        self.phase_trace: List[List[str]] = []

    @property
    def uses_weighting(self) -> bool:
        return self.config.trainer.ablation == "full"

    def weights(self, s: torch.Tensor, s_next: torch.Tensor) -> torch.Tensor:
        if not self.uses_weighting:
            return torch.ones(*s.shape[:-1], self.spec.n_factors, dtype=self.dtype)
        return curiosity_weights(self.density, self.spec, s, s_next)

    def intrinsic_reward(self, batch: TransitionBatch) -> torch.Tensor:
        with torch.no_grad():
            w = self.weights(batch.states, batch.next_states)
            return total_intrinsic_reward(
                self.bank, self.spec, w, batch.states, batch.next_states, batch.skills, self.prior.mode
            )

    def _episode(self, episode: int) -> List[Transition]:
        seed = self.config.trainer.seed
        skill = sample_skill(self.prior, np.random.default_rng(child_seed(seed, self.epoch, episode, 1)))
        env = copy.deepcopy(self.env)
        return collect_episode(
            env,
            self.agent,
            skill,
            seed=child_seed(seed, self.epoch, episode, 0),
            generator=torch_generator(child_seed(seed, self.epoch, episode, 2)),
        )

    def collect(self) -> List[List[Transition]]:
        episodes = range(self.config.trainer.episodes_per_epoch)
        workers = self.config.trainer.num_workers
        if workers <= 1:
            return [self._episode(i) for i in episodes]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(self._episode, episodes))

    def _store(self, transitions: List[Transition]) -> None:
        if not self.config.sac.relabel_rewards:
            s = torch.as_tensor(np.stack([t.state for t in transitions]), dtype=self.dtype)
            s_next = torch.as_tensor(np.stack([t.next_state for t in transitions]), dtype=self.dtype)
            z = torch.as_tensor(np.stack([t.skill for t in transitions]), dtype=self.dtype)
            with torch.no_grad():
                rewards = total_intrinsic_reward(
                    self.bank, self.spec, self.weights(s, s_next), s, s_next, z, self.prior.mode
                )
            for t, r in zip(transitions, rewards.tolist()):
                t.reward = r
        self.buffer.extend(transitions)

    def pretrain_epoch(self) -> Dict[str, Any]:
        try:
            return self._pretrain_epoch()
        except TrainingDivergenceError as exc:
            raise exc.at_epoch(self.epoch) from exc

    def _pretrain_epoch(self) -> Dict[str, Any]:
        cfg = self.config
        trace: List[str] = []

        transitions = [t for episode in self.collect() for t in episode]
        self._store(transitions)
        self.env_steps += len(transitions)
        trace.append("collect")

        density_nll = math.nan
        if self.uses_weighting:
            losses = fit(
                self.density,
                np.stack([t.state for t in transitions]),
                np.stack([t.next_state for t in transitions]),
                grad_steps=cfg.density.grad_steps,
                batch_size=cfg.density.batch_size,
                optimizer=self.density_optimizer,
                rng=self.rng,
            )
            density_nll = losses[-1] if losses else math.nan
            trace.append("density")

        batch_size = cfg.sac.batch_size
        phi_values: List[float] = []
        for _ in range(cfg.trainer.grad_steps):
            batch = self.buffer.sample(batch_size, self.rng, dtype=self.dtype)
            phi_values.append(sum(self.updater.phi_step(batch.states, batch.next_states, batch.skills, self.prior.mode)))
        trace.append("phi")

        for _ in range(cfg.trainer.grad_steps):
            batch = self.buffer.sample(batch_size, self.rng, dtype=self.dtype)
            self.updater.lambda_step(batch.states, batch.next_states)
        trace.append("lambda")

        reward_fn = self.intrinsic_reward if cfg.sac.relabel_rewards else None
        sac = self.agent.update(
            self.buffer,
            reward_fn=reward_fn,
            batch_size=batch_size,
            grad_steps=cfg.trainer.grad_steps,
            rng=self.rng,
        )
        trace.append("sac")
        self.phase_trace.append(trace)

        row = self._metrics(sac, density_nll, phi_values)
        self.epoch += 1
        self.bundle.epoch = self.epoch
        return row

    def _metrics(self, sac: Dict[str, float], density_nll: float, phi_values: List[float]) -> Dict[str, Any]:
        batch = self.buffer.sample(self.config.sac.batch_size, self.rng, dtype=self.dtype)
        norms = displacement_norms(self.bank, self.spec, batch.states, batch.next_states)
        mean_weights = self.weights(batch.states, batch.next_states).mean(dim=0).tolist()
        lambdas = self.bank.lambdas.detach().tolist()

        row: Dict[str, Any] = {
            "epoch": self.epoch,
            "env_steps": self.env_steps,
            "mean_reward": float(self.intrinsic_reward(batch).mean()),
            "critic_loss": sac["critic_loss"],
            "actor_loss": sac["actor_loss"],
            "alpha_loss": sac["alpha_loss"],
            "alpha": sac["alpha"],
            "density_nll": density_nll,
            "phi_objective": float(np.mean(phi_values)) if phi_values else math.nan,
        }
        for i, name in enumerate(self.spec.names):
            row[f"delta_norm_{name}"] = float(norms[i])
            row[f"lambda_{name}"] = lambdas[i]
            row[f"weight_{name}"] = mean_weights[i]

        if np.all(norms < COLLAPSE_NORM):
            logger.warning("epoch %d: every ||delta phi|| is below %.0e; embeddings may have collapsed", self.epoch, COLLAPSE_NORM)
        pinned = [name for name, lam in zip(self.spec.names, lambdas) if lam == 0.0]
        if pinned:
            logger.warning("epoch %d: multipliers pinned at 0 for %s", self.epoch, ", ".join(pinned))
        return row

    def run(self, run_dir: Path, epochs: Optional[int] = None, run_logger: Optional[RunLogger] = None) -> pd.DataFrame:
        """Train for `epochs` (default trainer.epochs), writing metrics.csv,
        periodic checkpoints and a final bundle under `run_dir`."""
        run_dir = Path(run_dir)
        epochs = self.config.trainer.epochs if epochs is None else epochs
        every = self.config.trainer.checkpoint_every
        writer = MetricsWriter(run_dir / "metrics.csv")

        for _ in range(epochs):
            try:
                row = self.pretrain_epoch()
            except TrainingDivergenceError as exc:
                writer.flush()
                if run_logger:
                    run_logger.divergence(str(exc), epoch=exc.epoch, step=exc.step)
                raise
            writer.append(row)
            if run_logger:
                run_logger.epoch_completed(row["epoch"], row)
            logger.info(
                "epoch %d: steps=%d reward=%.4f critic=%.4f alpha=%.4f",
                row["epoch"], row["env_steps"], row["mean_reward"], row["critic_loss"], row["alpha"],
            )
            if every and self.epoch % every == 0:
                path = save_bundle(self.bundle, run_dir / "checkpoints" / f"epoch_{self.epoch:06d}")
                writer.flush()
                if run_logger:
                    run_logger.checkpoint_saved(self.epoch, path)

        writer.flush()
        final = save_bundle(self.bundle, run_dir / "checkpoints" / "final")
        if run_logger:
            run_logger.checkpoint_saved(self.epoch, final)
        return writer.frame()
