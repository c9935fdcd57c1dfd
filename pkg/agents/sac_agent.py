"""Soft Actor-Critic with a tanh-squashed Gaussian actor, twin critics with
Polyak-averaged targets and a log-parameterised adaptive entropy weight.

Policies are conditioned on a skill vector by concatenating it to the
state; a skill dimension of 0 gives a plain state-conditioned agent (used by
the high-level controller in hrl/).
"""

import copy
import logging
import math
from typing import Callable, Dict, Optional

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from tensormath import AdamState, Mlp, hidden_layout, minimize, module_arrays, load_module_arrays, torch_generator
from tensormath.errors import ContractError, DimensionError, TrainingDivergenceError

from .base_agent import BaseAgent
from .replay_buffer import ReplayBuffer, TransitionBatch

logger = logging.getLogger(__name__)

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
LOG_2 = math.log(2.0)

RewardFn = Callable[[TransitionBatch], torch.Tensor]


def tanh_log_det(pre_tanh: torch.Tensor) -> torch.Tensor:
    """log(1 − tanh(u)²), computed stably."""
    return 2.0 * (LOG_2 - pre_tanh - F.softplus(-2.0 * pre_tanh))


def bellman_target(
    rewards: torch.Tensor,
    dones: torch.Tensor,
    next_q1: torch.Tensor,
    next_q2: torch.Tensor,
    next_log_prob: torch.Tensor,
    alpha: float,
    gamma: float,
) -> torch.Tensor:
    soft_value = torch.min(next_q1, next_q2) - alpha * next_log_prob
    return rewards + gamma * (1.0 - dones) * soft_value


def polyak_update(target: nn.Module, source: nn.Module, tau: float) -> None:
    """target ← τ·target + (1 − τ)·source."""
    with torch.no_grad():
        for p_target, p_source in zip(target.parameters(), source.parameters()):
            p_target.mul_(tau).add_(p_source, alpha=1.0 - tau)


class SacAgent(BaseAgent):
    def __init__(
        self,
        obs_dim: int,
        skill_dim: int,
        action_dim: int,
        hidden: int = 256,
        hidden_layers: int = 2,
        learning_rate: float = 1e-4,
        gamma: float = 0.99,
        tau: float = 0.995,
        init_alpha: float = 0.1,
        target_entropy: Optional[float] = None,
        activation: str = "relu",
        dtype: torch.dtype = torch.float32,
        seed: int = 0,
        name: str = "SAC",
    ):
        super().__init__(name)
        if init_alpha <= 0:
            raise ContractError(f"initial entropy coefficient must be positive, got {init_alpha}")
        self.obs_dim = obs_dim
        self.skill_dim = skill_dim
        self.action_dim = action_dim
        self.gamma = gamma
        self.tau = tau
        self.dtype = dtype
        self.target_entropy = -float(action_dim) if target_entropy is None else float(target_entropy)
        self.generator = torch_generator(seed)

        in_dim = obs_dim + skill_dim

        def mlp(n_in: int, n_out: int) -> Mlp:
            return Mlp(hidden_layout(n_in, n_out, hidden, hidden_layers), activation=activation, dtype=dtype)

        actor = mlp(in_dim, 2 * action_dim)
        critic1 = mlp(in_dim + action_dim, 1)
        critic2 = mlp(in_dim + action_dim, 1)
        self.nets = nn.ModuleDict(
            {
                "actor": actor,
                "critic1": critic1,
                "critic2": critic2,
                "target1": copy.deepcopy(critic1),
                "target2": copy.deepcopy(critic2),
            }
        )
        for p in list(self.nets["target1"].parameters()) + list(self.nets["target2"].parameters()):
            p.requires_grad_(False)
        self.log_alpha = nn.Parameter(torch.tensor(math.log(init_alpha), dtype=dtype))

        critic_params = {f"critic1.{n}": p for n, p in critic1.named_parameters()}
        critic_params.update({f"critic2.{n}": p for n, p in critic2.named_parameters()})
        self.critic_optimizer = AdamState(critic_params, learning_rate=learning_rate)
        self.actor_optimizer = AdamState(actor, learning_rate=learning_rate)
        self.alpha_optimizer = AdamState({"log_alpha": self.log_alpha}, learning_rate=learning_rate)

    @property
    def actor(self) -> Mlp:
        return self.nets["actor"]

    @property
    def alpha(self) -> float:
        return float(self.log_alpha.detach().exp())

    def inputs(self, states: torch.Tensor, skills: torch.Tensor) -> torch.Tensor:
        return torch.cat([states, skills], dim=-1) if self.skill_dim else states

    def policy(self, inputs: torch.Tensor):
        out = self.actor(inputs)
        mean, log_std = out[..., : self.action_dim], out[..., self.action_dim:]
        return mean, torch.clamp(log_std, LOG_STD_MIN, LOG_STD_MAX)

    def sample(self, inputs: torch.Tensor, noise: torch.Tensor):
        """Reparameterised tanh-Gaussian sample and its log-probability."""
        mean, log_std = self.policy(inputs)
        std = log_std.exp()
        pre_tanh = mean + std * noise
        log_prob = torch.distributions.Normal(mean, std).log_prob(pre_tanh) - tanh_log_det(pre_tanh)
        return torch.tanh(pre_tanh), log_prob.sum(dim=-1)

    def q_values(self, inputs: torch.Tensor, actions: torch.Tensor, which: str = "critic"):
        joint = torch.cat([inputs, actions], dim=-1)
        first, second = ("critic1", "critic2") if which == "critic" else ("target1", "target2")
        return self.nets[first](joint).squeeze(-1), self.nets[second](joint).squeeze(-1)

    def noise(self, shape, generator: Optional[torch.Generator] = None) -> torch.Tensor:
        return torch.randn(*shape, self.action_dim, generator=generator or self.generator, dtype=self.dtype)

    def act(self, state, skill, stochastic: bool = True, generator: Optional[torch.Generator] = None) -> np.ndarray:
        state = torch.as_tensor(np.asarray(state), dtype=self.dtype).reshape(-1)
        skill = torch.as_tensor(np.asarray(skill), dtype=self.dtype).reshape(-1)
        if state.shape[0] != self.obs_dim or skill.shape[0] != self.skill_dim:
            raise DimensionError(
                f"{self.name}: expected state {self.obs_dim} / skill {self.skill_dim} dims, "
                f"got {state.shape[0]} / {skill.shape[0]}"
            )
        with torch.no_grad():
            inputs = self.inputs(state, skill)
            if stochastic:
                action, _ = self.sample(inputs, self.noise((), generator))
            else:
                action = torch.tanh(self.policy(inputs)[0])
        return action.double().numpy()

    def critic_loss(self, batch: TransitionBatch, rewards: torch.Tensor, next_noise: torch.Tensor) -> torch.Tensor:
        inputs = self.inputs(batch.states, batch.skills)
        next_inputs = self.inputs(batch.next_states, batch.skills)
        with torch.no_grad():
            next_actions, next_log_prob = self.sample(next_inputs, next_noise)
            next_q1, next_q2 = self.q_values(next_inputs, next_actions, which="target")
            target = bellman_target(rewards, batch.dones, next_q1, next_q2, next_log_prob, self.alpha, self.gamma)
        q1, q2 = self.q_values(inputs, batch.actions)
        return 0.5 * ((q1 - target) ** 2).mean() + 0.5 * ((q2 - target) ** 2).mean()

    def actor_loss(self, batch: TransitionBatch, noise: torch.Tensor):
        inputs = self.inputs(batch.states, batch.skills)
        actions, log_prob = self.sample(inputs, noise)
        q1, q2 = self.q_values(inputs, actions)
        return (self.alpha * log_prob - torch.min(q1, q2)).mean(), log_prob

    def alpha_loss(self, log_prob: torch.Tensor) -> torch.Tensor:
        return -(self.log_alpha * (log_prob.detach() + self.target_entropy)).mean()

    def update(
        self,
        buffer: ReplayBuffer,
        reward_fn: Optional[RewardFn] = None,
        batch_size: int = 256,
        grad_steps: int = 50,
        rng: Optional[np.random.Generator] = None,
    ) -> Dict[str, float]:
        """`grad_steps` rounds of critic, actor, α and target updates.

        `reward_fn` recomputes rewards for each sampled batch; without it the
        rewards stored in the buffer are used.
        """
        if len(buffer) < batch_size:
            raise ContractError(f"buffer holds {len(buffer)} transitions, need at least {batch_size}")
        rng = rng or np.random.default_rng(0)
        totals = {"critic_loss": 0.0, "actor_loss": 0.0, "alpha_loss": 0.0, "reward": 0.0}

        for step in range(grad_steps):
            batch = buffer.sample(batch_size, rng, dtype=self.dtype)
            rewards = batch.rewards if reward_fn is None else reward_fn(batch).detach().to(self.dtype)
            try:
                totals["critic_loss"] += minimize(
                    self.critic_optimizer, self.critic_loss(batch, rewards, self.noise((batch_size,)))
                )
                actor_loss, log_prob = self.actor_loss(batch, self.noise((batch_size,)))
                totals["actor_loss"] += minimize(self.actor_optimizer, actor_loss)
                totals["alpha_loss"] += minimize(self.alpha_optimizer, self.alpha_loss(log_prob))
            except TrainingDivergenceError as exc:
                raise TrainingDivergenceError(
                    f"{self.name} diverged at grad step {step}: {exc}", parameter=exc.parameter, step=step
                ) from exc
            polyak_update(self.nets["target1"], self.nets["critic1"], self.tau)
            polyak_update(self.nets["target2"], self.nets["critic2"], self.tau)
            totals["reward"] += float(rewards.mean())

        summary = {key: value / max(grad_steps, 1) for key, value in totals.items()}
        summary["alpha"] = self.alpha
        self.log_decision("critic loss", summary["critic_loss"])
        return summary

    def state_arrays(self) -> Dict[str, np.ndarray]:
        arrays = module_arrays(self.nets, prefix="nets.")
        arrays["log_alpha"] = self.log_alpha.detach().cpu().numpy()
        return arrays

    def load_state_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        load_module_arrays(self.nets, {k: v for k, v in arrays.items() if k.startswith("nets.")}, prefix="nets.")
        with torch.no_grad():
            self.log_alpha.copy_(torch.as_tensor(arrays["log_alpha"], dtype=self.dtype))

    def freeze(self) -> None:
        for p in self.nets.parameters():
            p.requires_grad_(False)
        self.log_alpha.requires_grad_(False)
