"""Per-factor embeddings φᵢ and the SUSD objectives built on them.

For factor i and a transition (s, s′) with skill block zⁱ:

    Δφᵢ   = φᵢ(s′ⁱ) − φᵢ(sⁱ)
    rᵢ    = Δφᵢᵀ zⁱ
    J^φᵢ  = E[rᵢ + λᵢ · min(ε, 1 − ‖Δφᵢ‖₂)]       (ascended in φᵢ)
    J^λᵢ  = −λᵢ · E[min(ε, 1 − ‖Δφᵢ‖₂)]            (ascended in λᵢ)
    R     = Σᵢ wᵢ rᵢ                                 (policy reward)

with one constraint and one multiplier per factor. For discrete skills rᵢ
is replaced by a zero-mean contrast over the one-hot choices.
"""

import logging
from typing import Dict, List

import numpy as np
import torch
from torch import nn

from envs.base import FactorSpec, factor_slice
from tensormath import AdamState, Mlp, backward, hidden_layout, minimize
from tensormath.errors import ContractError, DimensionError, TrainingDivergenceError, UnsupportedModeError

from .prior import SkillMode, SkillVector

logger = logging.getLogger(__name__)

ZERO_SHOT_MIN_NORM = 1e-8


class EmbeddingBank(nn.Module):
    """N independent maps φᵢ: ℝ^dim(sⁱ) → ℝ^D plus nonnegative λᵢ."""

    def __init__(
        self,
        spec: FactorSpec,
        skill_dim: int,
        hidden: int = 256,
        hidden_layers: int = 2,
        initial_lambda: float = 3000.0,
        epsilon: float = 1e-6,
        activation: str = "relu",
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        if epsilon <= 0:
            raise ContractError(f"epsilon must be positive, got {epsilon}")
        if initial_lambda < 0:
            raise ContractError(f"initial lambda must be nonnegative, got {initial_lambda}")
        self.spec = spec
        self.skill_dim = int(skill_dim)
        self.epsilon = float(epsilon)
        self.nets = nn.ModuleList(
            Mlp(hidden_layout(dim, self.skill_dim, hidden, hidden_layers), activation=activation, dtype=dtype)
            for dim in spec.dims
        )
        self.lambdas = nn.Parameter(torch.full((spec.n_factors,), float(initial_lambda), dtype=dtype))

    @property
    def n_factors(self) -> int:
        return len(self.nets)

    @property
    def dtype(self) -> torch.dtype:
        return self.lambdas.dtype

    def phi_parameters(self) -> Dict[str, nn.Parameter]:
        return {f"nets.{name}": p for name, p in self.nets.named_parameters()}

    def embed(self, states: torch.Tensor, i: int) -> torch.Tensor:
        return self.nets[i](factor_slice(self.spec, states, i))

    def embed_all(self, states: torch.Tensor) -> torch.Tensor:
        return torch.cat([self.embed(states, i) for i in range(self.n_factors)], dim=-1)

    def displacement(self, s: torch.Tensor, s_next: torch.Tensor, i: int) -> torch.Tensor:
        return self.embed(s_next, i) - self.embed(s, i)

    def clamp_lambdas(self) -> None:
        with torch.no_grad():
            self.lambdas.clamp_(min=0.0)


def _check_spec(bank: EmbeddingBank, spec: FactorSpec) -> None:
    if spec.dims != bank.spec.dims:
        raise DimensionError(f"EmbeddingBank was built for factor dims {bank.spec.dims}, got {spec.dims}")


def _check_batch(s: torch.Tensor) -> None:
    if s.ndim == 0 or (s.ndim > 1 and s.shape[0] == 0):
        raise ContractError("objective needs a nonempty batch of transitions")


def skill_block(z: torch.Tensor, dim: int, i: int) -> torch.Tensor:
    return z[..., i * dim:(i + 1) * dim]


def safe_norm(x: torch.Tensor) -> torch.Tensor:
    """ℓ2 norm over the last axis whose gradient is 0 at x = 0."""
    squared = (x * x).sum(dim=-1)
    return torch.where(squared > 0, squared.clamp_min(1e-30).sqrt(), torch.zeros_like(squared))


def constraint_slack(bank: EmbeddingBank, spec: FactorSpec, s, s_next, i: int) -> torch.Tensor:
    """min(ε, 1 − ‖Δφᵢ‖₂) per transition."""
    norm = safe_norm(bank.displacement(s, s_next, i))
    return torch.clamp(1.0 - norm, max=bank.epsilon)


def discrete_contrast(delta: torch.Tensor, k) -> torch.Tensor:
    """Δ_k − Σ_{j≠k} Δ_j / (D − 1); sums to zero over k."""
    dim = delta.shape[-1]
    if dim < 2:
        raise UnsupportedModeError(f"discrete skills need D >= 2, got D = {dim}")
    k = torch.as_tensor(k, device=delta.device).long()
    picked = torch.gather(delta, -1, k.expand(delta.shape[:-1]).unsqueeze(-1)).squeeze(-1)
    return picked - (delta.sum(dim=-1) - picked) / (dim - 1)


def factor_reward(bank: EmbeddingBank, spec: FactorSpec, s, s_next, z, i: int) -> torch.Tensor:
    """rᵢ = (φᵢ(s′ⁱ) − φᵢ(sⁱ))ᵀ zⁱ."""
    _check_spec(bank, spec)
    return (bank.displacement(s, s_next, i) * skill_block(z, bank.skill_dim, i)).sum(dim=-1)


def discrete_factor_reward(bank: EmbeddingBank, spec: FactorSpec, s, s_next, k, i: int) -> torch.Tensor:
    _check_spec(bank, spec)
    return discrete_contrast(bank.displacement(s, s_next, i), k)


def _reward_for_mode(bank, spec, s, s_next, z, i, mode: SkillMode) -> torch.Tensor:
    if SkillMode(mode) is SkillMode.DISCRETE:
        k = skill_block(z, bank.skill_dim, i).argmax(dim=-1)
        return discrete_factor_reward(bank, spec, s, s_next, k, i)
    return factor_reward(bank, spec, s, s_next, z, i)


def phi_objective(
    bank: EmbeddingBank, spec: FactorSpec, s, s_next, z, i: int, mode: SkillMode = SkillMode.CONTINUOUS
) -> torch.Tensor:
    """Per-factor Lagrangian J^φᵢ; λᵢ enters as a constant."""
    _check_batch(s)
    reward = _reward_for_mode(bank, spec, s, s_next, z, i, mode)
    penalty = bank.lambdas[i].detach() * constraint_slack(bank, spec, s, s_next, i)
    return (reward + penalty).mean()


def lambda_objective(bank: EmbeddingBank, spec: FactorSpec, s, s_next, i: int) -> torch.Tensor:
    """J^λᵢ = −λᵢ · E[min(ε, 1 − ‖Δφᵢ‖)]; φ enters as a constant."""
    _check_batch(s)
    with torch.no_grad():
        slack = constraint_slack(bank, spec, s, s_next, i).mean()
    return -bank.lambdas[i] * slack


def total_intrinsic_reward(
    bank: EmbeddingBank,
    spec: FactorSpec,
    weights: torch.Tensor,
    s,
    s_next,
    z,
    mode: SkillMode = SkillMode.CONTINUOUS,
) -> torch.Tensor:
    """R = Σᵢ wᵢ rᵢ with the weights treated as constants."""
    weights = torch.as_tensor(weights, dtype=bank.dtype).detach()
    if (weights < 0).any():
        raise ContractError("curiosity weights must be nonnegative")
    if weights.shape[-1] != spec.n_factors:
        raise DimensionError(f"expected {spec.n_factors} weights per transition, got shape {tuple(weights.shape)}")
    rewards = torch.stack(
        [_reward_for_mode(bank, spec, s, s_next, z, i, mode) for i in range(spec.n_factors)], dim=-1
    )
    return (weights * rewards).sum(dim=-1)


def zero_shot_skill(bank: EmbeddingBank, spec: FactorSpec, state, goal) -> SkillVector:
    """Per factor, the unit direction from φᵢ(sⁱ) to φᵢ(gⁱ) (zero when the
    two embeddings coincide)."""
    _check_spec(bank, spec)
    state = torch.as_tensor(np.asarray(state), dtype=bank.dtype)
    goal = torch.as_tensor(np.asarray(goal), dtype=bank.dtype)
    blocks = np.zeros((spec.n_factors, bank.skill_dim))
    with torch.no_grad():
        for i in range(spec.n_factors):
            direction = (bank.embed(goal, i) - bank.embed(state, i)).double()
            norm = float(direction.norm())
            if norm >= ZERO_SHOT_MIN_NORM:
                blocks[i] = (direction / norm).numpy()
    return SkillVector(blocks, SkillMode.CONTINUOUS)


def displacement_norms(bank: EmbeddingBank, spec: FactorSpec, s, s_next) -> np.ndarray:
    """Batch-mean ‖Δφᵢ‖₂ per factor."""
    with torch.no_grad():
        return np.array([float(safe_norm(bank.displacement(s, s_next, i)).mean()) for i in range(spec.n_factors)])


class DualUpdater:
    """Dual gradient steps for the embedding bank: Adam ascent on every
    J^φᵢ, plain gradient ascent on every J^λᵢ, then λ clamped at 0."""

    def __init__(self, bank: EmbeddingBank, learning_rate: float = 1e-4, lambda_learning_rate: float = 1e-4):
        self.bank = bank
        self.phi_state = AdamState(bank.phi_parameters(), learning_rate=learning_rate)
        self.lambda_optimizer = torch.optim.SGD([bank.lambdas], lr=lambda_learning_rate)

    def phi_step(self, s, s_next, z, mode: SkillMode = SkillMode.CONTINUOUS) -> List[float]:
        objectives = [
            phi_objective(self.bank, self.bank.spec, s, s_next, z, i, mode) for i in range(self.bank.n_factors)
        ]
        minimize(self.phi_state, -torch.stack(objectives).sum())
        return [float(o.detach()) for o in objectives]

    def lambda_step(self, s, s_next) -> List[float]:
        objectives = [lambda_objective(self.bank, self.bank.spec, s, s_next, i) for i in range(self.bank.n_factors)]
        grads = backward(-torch.stack(objectives).sum(), {"lambdas": self.bank.lambdas})
        if not torch.isfinite(grads["lambdas"]).all():
            raise TrainingDivergenceError("non-finite gradient for parameter 'lambdas'", parameter="lambdas")
        self.bank.lambdas.grad = grads["lambdas"]
        self.lambda_optimizer.step()
        self.lambda_optimizer.zero_grad(set_to_none=True)
        self.bank.clamp_lambdas()
        return [float(o.detach()) for o in objectives]
