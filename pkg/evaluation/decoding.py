"""Factor decoding: how much of the full state can a small decoder read
back out of the concatenated factor embeddings?

Data are split 80/10/10; the decoder's hidden size is picked on the
validation split and the chosen decoder is scored once on the test split,
per factor.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import torch

from envs import FactorSpec, factor_slice
from skills import EmbeddingBank, sample_skill
from tensormath import AdamState, Mlp, child_seed, minimize, torch_generator
from tensormath.errors import ContractError

logger = logging.getLogger(__name__)

MP_CANDIDATES = (30, 35, 40, 45, 50, 55, 60, 65)
HIDDEN_CANDIDATES: Dict[str, Tuple[int, ...]] = {
    "gunner": (10, 12, 14, 16),
    "multiparticle": MP_CANDIDATES,
    "multiparticle-mini": MP_CANDIDATES,
    "pointnav": (10, 20, 30, 40),
}


@dataclass
class DecodeReport:
    factor_mse: Dict[str, float]
    hidden_size: int
    split_sizes: Tuple[int, int, int]
    validation_mse: Dict[int, float]

    @property
    def mean_mse(self) -> float:
        return float(np.mean(list(self.factor_mse.values())))

    def to_rows(self):
        rows = [{"factor": k, "test_mse": v} for k, v in self.factor_mse.items()]
        rows.append({"factor": "mean", "test_mse": self.mean_mse})
        return rows


def split_indices(n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    perm = rng.permutation(n)
    n_train, n_val = int(0.8 * n), int(0.1 * n)
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def _train_decoder(
    x: torch.Tensor, y: torch.Tensor, hidden: int, epochs: int, batch_size: int, learning_rate: float, seed: int
) -> Mlp:
    torch.manual_seed(seed)
    net = Mlp([x.shape[1], hidden, y.shape[1]], dtype=x.dtype)
    optimizer = AdamState(net, learning_rate=learning_rate)
    generator = torch_generator(seed)
    for _ in range(epochs):
        order = torch.randperm(len(x), generator=generator)
        for start in range(0, len(x), batch_size):
            idx = order[start:start + batch_size]
            minimize(optimizer, ((net(x[idx]) - y[idx]) ** 2).mean())
    return net


def decode_from_features(
    features: np.ndarray,
    targets: np.ndarray,
    spec: FactorSpec,
    hidden_candidates: Sequence[int],
    epochs: int = 100,
    batch_size: int = 1024,
    learning_rate: float = 1e-4,
    seed: int = 0,
) -> DecodeReport:
    if not hidden_candidates:
        raise ContractError("factor decoding needs at least one hidden-size candidate")
    if len(features) != len(targets):
        raise ContractError(f"{len(features)} feature rows but {len(targets)} targets")
    train, val, test = split_indices(len(features), np.random.default_rng(seed))
    if len(val) == 0 or len(test) == 0:
        raise ContractError(f"need at least 10 samples for an 80/10/10 split, got {len(features)}")

    x = torch.as_tensor(np.asarray(features), dtype=torch.float64)
    y = torch.as_tensor(np.asarray(targets), dtype=torch.float64)
    validation: Dict[int, float] = {}
    best_net, best_hidden = None, None
    for hidden in hidden_candidates:
        net = _train_decoder(x[train], y[train], hidden, epochs, batch_size, learning_rate, seed)
        with torch.no_grad():
            mse = float(((net(x[val]) - y[val]) ** 2).mean())
        validation[hidden] = mse
        if best_hidden is None or mse < validation[best_hidden]:
            best_net, best_hidden = net, hidden

    with torch.no_grad():
        squared = (best_net(x[test]) - y[test]) ** 2
    factor_mse = {name: float(factor_slice(spec, squared, i).mean()) for i, name in enumerate(spec.names)}
    logger.info("decode: hidden %d chosen, mean test MSE %.5f", best_hidden, float(np.mean(list(factor_mse.values()))))
    return DecodeReport(factor_mse, best_hidden, (len(train), len(val), len(test)), validation)


def embedding_features(bank: EmbeddingBank, spec: FactorSpec, states: np.ndarray) -> np.ndarray:
    """[φ₁(s¹), …, φ_N(s^N)] per row."""
    s = torch.as_tensor(np.asarray(states), dtype=bank.dtype)
    with torch.no_grad():
        return torch.cat([bank.embed(s, i) for i in range(spec.n_factors)], dim=-1).double().numpy()


def collect_states(bundle, steps: int, resample_every: int = 200, seed: int = 0) -> np.ndarray:
    """States visited by the skill policy, with a new skill every
    `resample_every` steps."""
    env, agent = bundle.env, bundle.agent
    rng = np.random.default_rng(child_seed(seed, 11))
    generator = torch_generator(child_seed(seed, 12))
    resets = 0
    state = env.reset(child_seed(seed, 13, resets))
    skill = sample_skill(bundle.prior, rng).flat()
    states = []
    for t in range(steps):
        if t and t % resample_every == 0:
            skill = sample_skill(bundle.prior, rng).flat()
        states.append(state)
        step = env.step(agent.act(state, skill, stochastic=True, generator=generator))
        state = step.next_state
        if step.done:
            resets += 1
            state = env.reset(child_seed(seed, 13, resets))
    return np.stack(states)


def factor_decode(
    bundle,
    steps: int = 100_000,
    hidden_candidates: Optional[Sequence[int]] = None,
    resample_every: int = 200,
    epochs: int = 100,
    batch_size: int = 1024,
    learning_rate: float = 1e-4,
    seed: int = 0,
) -> DecodeReport:
    """Decode the full state (reported per factor of the env's native
    layout) from the bundle's embeddings."""
    env_name = bundle.config.env.name
    candidates = hidden_candidates if hidden_candidates is not None else HIDDEN_CANDIDATES.get(env_name, ())
    states = collect_states(bundle, steps, resample_every, seed)
    features = embedding_features(bundle.bank, bundle.spec, states)
    return decode_from_features(
        features, states, bundle.env.factor_spec, candidates, epochs, batch_size, learning_rate, seed
    )
