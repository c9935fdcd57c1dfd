import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from tensormath.errors import ContractError, DimensionError

logger = logging.getLogger(__name__)

AGENT_TAG = "agent"


@dataclass(frozen=True)
class Factor:
    name: str
    start: int
    stop: int
    tags: Tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.stop - self.start

    @property
    def is_agent(self) -> bool:
        return AGENT_TAG in self.tags


@dataclass(frozen=True)
class FactorSpec:
    """Partition of the flat state vector into named, disjoint index ranges."""

    factors: Tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ContractError("FactorSpec needs at least one factor")
        total = max(f.stop for f in self.factors)
        covered = np.zeros(total, dtype=int)
        for f in self.factors:
            if f.start < 0 or f.stop <= f.start:
                raise ContractError(f"Factor {f.name!r} has an empty or negative range [{f.start}, {f.stop})")
            covered[f.start:f.stop] += 1
        if not np.all(covered == 1):
            raise ContractError(
                f"Factor ranges must be disjoint and cover [0, {total}); coverage counts {covered.tolist()}"
            )
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise ContractError(f"Factor names must be unique, got {names}")

    @classmethod
    def from_sizes(
        cls, names: Sequence[str], sizes: Sequence[int], tags: Optional[Sequence[Tuple[str, ...]]] = None
    ) -> "FactorSpec":
        tags = tags or [()] * len(names)
        factors, start = [], 0
        for name, size, tag in zip(names, sizes, tags):
            factors.append(Factor(name, start, start + int(size), tuple(tag)))
            start += int(size)
        return cls(tuple(factors))

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @property
    def state_dim(self) -> int:
        return max(f.stop for f in self.factors)

    @property
    def dims(self) -> List[int]:
        return [f.dim for f in self.factors]

    @property
    def names(self) -> List[str]:
        return [f.name for f in self.factors]

    def agent_factor_indices(self) -> List[int]:
        return [i for i, f in enumerate(self.factors) if f.is_agent]

    def to_dict(self) -> Dict[str, Any]:
        return {"factors": [[f.name, f.start, f.stop, list(f.tags)] for f in self.factors]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FactorSpec":
        return cls(tuple(Factor(name, start, stop, tuple(tags)) for name, start, stop, tags in data["factors"]))


def factor_slice(spec: FactorSpec, state, i: int):
    """sⁱ: the contiguous sub-vector of `state` belonging to factor i.

    Works on numpy arrays and torch tensors, with any leading batch shape.
    """
    if not 0 <= i < spec.n_factors:
        raise IndexError(f"factor index {i} out of range for {spec.n_factors} factors")
    if state.shape[-1] != spec.state_dim:
        raise DimensionError(f"state has last dimension {state.shape[-1]}, FactorSpec covers {spec.state_dim}")
    factor = spec.factors[i]
    return state[..., factor.start:factor.stop]


@dataclass
class EnvStep:
    next_state: np.ndarray
    task_reward: float = 0.0
    done: bool = False
    info: Dict[str, Any] = field(default_factory=dict)


@dataclass
class Transition:
    """(s, a, s′, z, done) plus the reward known at collection time.

    `done` marks true termination only; time-limit ends are kept out of it
    so the critic still bootstraps through them.
    """

    state: np.ndarray
    action: np.ndarray
    next_state: np.ndarray
    skill: np.ndarray
    done: bool = False
    reward: float = 0.0


class BaseEnv(ABC):
    """Reward-free factored environment with box actions in [-1, 1]^A.

    Subclasses declare their layout and implement `_initial_state` and
    `_transition`; the base class owns seeding, action validation, clipping
    and the episode clock.
    """

    name: str = "base"
    observation_dim: int
    action_dim: int
    position_bounds: Tuple[float, float]

    def __init__(self, episode_length: int):
        if episode_length <= 0:
            raise ContractError(f"episode_length must be positive, got {episode_length}")
        self.episode_length = int(episode_length)
        self._rng = np.random.default_rng(0)
        self._state: Optional[np.ndarray] = None
        self._t = 0

    @property
    @abstractmethod
    def factor_spec(self) -> FactorSpec:
        """The environment's native factorization."""

    @abstractmethod
    def _initial_state(self) -> np.ndarray:
        pass

    @abstractmethod
    def _transition(self, action: np.ndarray) -> Tuple[np.ndarray, Dict[str, Any]]:
        pass

    @abstractmethod
    def agent_positions(self, state: np.ndarray) -> Dict[str, np.ndarray]:
        """(x, y) of every agent keyed by its agent-tagged factor name."""

    @property
    def state(self) -> np.ndarray:
        if self._state is None:
            raise ContractError(f"{self.name}: call reset() before reading the state")
        return self._state.copy()

    @property
    def t(self) -> int:
        return self._t

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    def reset(self, seed: int) -> np.ndarray:
        self._rng = np.random.default_rng(int(seed))
        self._t = 0
        self._state = np.asarray(self._initial_state(), dtype=np.float64)
        if self._state.shape != (self.observation_dim,):
            raise DimensionError(
                f"{self.name}: initial state has shape {self._state.shape}, expected ({self.observation_dim},)"
            )
        return self._state.copy()

    def step(self, action) -> EnvStep:
        if self._state is None:
            raise ContractError(f"{self.name}: call reset() before step()")
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.shape != (self.action_dim,):
            raise DimensionError(f"{self.name}: action has shape {action.shape}, expected ({self.action_dim},)")
        if np.isnan(action).any():
            raise ContractError(f"{self.name}: NaN in action {action.tolist()}")
        clipped = np.clip(action, -1.0, 1.0)

        next_state, info = self._transition(clipped)
        self._state = np.asarray(next_state, dtype=np.float64)
        self._t += 1
        done = self._t >= self.episode_length
        info = dict(info)
        info["time_limit"] = done
        info["t"] = self._t
        return EnvStep(next_state=self._state.copy(), task_reward=0.0, done=done, info=info)

    def rollout(self, actions: Iterable[np.ndarray]) -> List[EnvStep]:
        return [self.step(a) for a in actions]
