"""Conditional diagonal Gaussian q_θ(s′|s) and factor-wise curiosity weights.

The net maps s to a mean and a log-variance over the full next state.
Because the covariance is diagonal, the marginal of factor i is the
Gaussian with the factor-i slices of the mean and variance, so

    −log q_θ(s′ⁱ|s) = ½ Σ_d [(x_d − μ_d)²/σ_d² + log σ_d² + log 2π]

over the dims d of factor i, and the factor NLLs sum to the full NLL.
The curiosity weight of factor i is √max(0, −log q_θ(s′ⁱ|s)).
"""

import logging
import math
from typing import List, Optional

import numpy as np
import torch
from torch import nn

from envs.base import FactorSpec, factor_slice
from tensormath import AdamState, Mlp, hidden_layout, minimize
from tensormath.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
NLL_FLOOR = 0.0


class GaussianCondModel(nn.Module):
    def __init__(
        self,
        state_dim: int,
        hidden: int = 256,
        hidden_layers: int = 2,
        logvar_min: float = -10.0,
        logvar_max: float = 4.0,
        activation: str = "relu",
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        if logvar_min >= logvar_max:
            raise ContractError(f"log-variance bounds must be increasing, got [{logvar_min}, {logvar_max}]")
        self.state_dim = int(state_dim)
        self.logvar_min = float(logvar_min)
        self.logvar_max = float(logvar_max)
        self.net = Mlp(
            hidden_layout(state_dim, 2 * state_dim, hidden, hidden_layers), activation=activation, dtype=dtype
        )
        self.register_buffer("fit_count", torch.zeros((), dtype=torch.int64))

    @property
    def fitted(self) -> bool:
        return int(self.fit_count) > 0

    @property
    def dtype(self) -> torch.dtype:
        return self.net.dtype

    def predict(self, s: torch.Tensor):
        """(μ(s), log σ²(s)) with the log-variance clamped to its bounds."""
        out = self.net(s)
        mean, logvar = out[..., : self.state_dim], out[..., self.state_dim:]
        return mean, torch.clamp(logvar, self.logvar_min, self.logvar_max)

    def full_nll(self, s: torch.Tensor, s_next: torch.Tensor) -> torch.Tensor:
        mean, logvar = self.predict(s)
        return gaussian_nll(s_next, mean, logvar)


def gaussian_nll(x: torch.Tensor, mean: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """Diagonal-Gaussian negative log-likelihood summed over the last axis."""
    return 0.5 * (((x - mean) ** 2) * torch.exp(-logvar) + logvar + LOG_2PI).sum(dim=-1)


def factor_nll(model: GaussianCondModel, spec: FactorSpec, s, s_next, i: int) -> torch.Tensor:
    """−log q_θ(s′ⁱ|s) from the factor-i partition of μ_θ(s) and Σ_θ(s)."""
    if spec.state_dim != model.state_dim:
        raise DimensionError(f"model covers {model.state_dim} state dims, FactorSpec covers {spec.state_dim}")
    mean, logvar = model.predict(s)
    return gaussian_nll(
        factor_slice(spec, s_next, i), factor_slice(spec, mean, i), factor_slice(spec, logvar, i)
    )


def marginal_nll(model: GaussianCondModel, spec: FactorSpec, s, s_next, i: int) -> torch.Tensor:
    """Same quantity as factor_nll, evaluated through torch.distributions on
    an explicitly constructed marginal with a dense diagonal covariance."""
    mean, logvar = model.predict(s)
    mean_i = factor_slice(spec, mean, i)
    cov_i = torch.diag_embed(torch.exp(factor_slice(spec, logvar, i)))
    marginal = torch.distributions.MultivariateNormal(mean_i, covariance_matrix=cov_i)
    return -marginal.log_prob(factor_slice(spec, s_next, i))


def curiosity_weights(model: GaussianCondModel, spec: FactorSpec, s, s_next) -> torch.Tensor:
    """wᵢ = √max(0, −log q_θ(s′ⁱ|s)) per transition, shape (..., N), detached.

    An unfitted model gives all-ones weights.
    """
    batch_shape = torch.as_tensor(s).shape[:-1]
    if not model.fitted:
        return torch.ones(*batch_shape, spec.n_factors, dtype=model.dtype)
    with torch.no_grad():
        nll = torch.stack([factor_nll(model, spec, s, s_next, i) for i in range(spec.n_factors)], dim=-1)
        return torch.sqrt(torch.clamp(nll, min=NLL_FLOOR))


def fit(
    model: GaussianCondModel,
    states: np.ndarray,
    next_states: np.ndarray,
    grad_steps: int,
    batch_size: int,
    optimizer: Optional[AdamState] = None,
    rng: Optional[np.random.Generator] = None,
) -> List[float]:
    """Maximum-likelihood Adam steps on minibatches of (s, s′); returns the
    mean full-state NLL of every step."""
    states = np.asarray(states)
    next_states = np.asarray(next_states)
    if len(states) == 0:
        raise ContractError("density fit needs at least one transition")
    if states.shape != next_states.shape:
        raise DimensionError(f"states {states.shape} and next states {next_states.shape} differ")
    optimizer = optimizer or AdamState(model.net)
    rng = rng or np.random.default_rng(0)

    s_all = torch.as_tensor(states, dtype=model.dtype)
    s_next_all = torch.as_tensor(next_states, dtype=model.dtype)
    losses = []
    for _ in range(grad_steps):
        idx = torch.as_tensor(rng.integers(0, len(states), size=min(batch_size, len(states))))
        loss = model.full_nll(s_all[idx], s_next_all[idx]).mean()
        losses.append(minimize(optimizer, loss))
    model.fit_count += 1
    logger.debug("density fit: %d steps, final NLL %.4f", grad_steps, losses[-1] if losses else float("nan"))
    return losses
