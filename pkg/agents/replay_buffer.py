import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import torch

from envs.base import Transition
from tensormath.errors import ContractError, DimensionError


@dataclass
class TransitionBatch:
    states: torch.Tensor
    actions: torch.Tensor
    next_states: torch.Tensor
    skills: torch.Tensor
    dones: torch.Tensor
    rewards: torch.Tensor

    def __len__(self) -> int:
        return self.states.shape[0]


class ReplayBuffer:
    """FIFO ring buffer of transitions with uniform sampling.

    Storage starts small and doubles until `capacity`, after which the
    oldest transitions are overwritten. Appends and samples take the same
    lock, so parallel collectors can add episodes while the coordinator
    samples.
    """

    def __init__(
        self,
        obs_dim: int,
        action_dim: int,
        skill_dim: int,
        capacity: int = 1_000_000,
        initial_allocation: int = 4096,
    ):
        if capacity <= 0:
            raise ContractError(f"capacity must be positive, got {capacity}")
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.skill_dim = skill_dim
        self.capacity = int(capacity)
        self._allocated = min(self.capacity, initial_allocation)
        self._states = np.zeros((self._allocated, obs_dim), dtype=np.float32)
        self._actions = np.zeros((self._allocated, action_dim), dtype=np.float32)
        self._next_states = np.zeros((self._allocated, obs_dim), dtype=np.float32)
        self._skills = np.zeros((self._allocated, skill_dim), dtype=np.float32)
        self._dones = np.zeros(self._allocated, dtype=np.float32)
        self._rewards = np.zeros(self._allocated, dtype=np.float32)
        self._ptr = 0
        self._size = 0
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return self._size

    def _grow(self) -> None:
        new_size = min(self.capacity, self._allocated * 2)
        for attr in ("_states", "_actions", "_next_states", "_skills", "_dones", "_rewards"):
            old = getattr(self, attr)
            grown = np.zeros((new_size,) + old.shape[1:], dtype=old.dtype)
            grown[: self._allocated] = old
            setattr(self, attr, grown)
        self._allocated = new_size

    def add(self, transition: Transition) -> None:
        state = np.asarray(transition.state).reshape(-1)
        if state.shape[0] != self.obs_dim or np.asarray(transition.action).size != self.action_dim:
            raise DimensionError(
                f"transition does not match buffer layout (obs {self.obs_dim}, action {self.action_dim})"
            )
        with self._lock:
            if self._size == self._allocated and self._allocated < self.capacity:
                self._grow()
            i = self._ptr
            self._states[i] = state
            self._actions[i] = np.asarray(transition.action).reshape(-1)
            self._next_states[i] = np.asarray(transition.next_state).reshape(-1)
            self._skills[i] = np.asarray(transition.skill).reshape(-1)
            self._dones[i] = float(transition.done)
            self._rewards[i] = float(transition.reward)
            self._ptr = (self._ptr + 1) % self.capacity
            self._size = min(self._size + 1, self.capacity)

    def extend(self, transitions: Iterable[Transition]) -> None:
        for transition in transitions:
            self.add(transition)

    def sample(self, batch_size: int, rng: np.random.Generator, dtype: torch.dtype = torch.float32) -> TransitionBatch:
        with self._lock:
            if self._size == 0:
                raise ContractError("cannot sample from an empty replay buffer")
            idx = rng.integers(0, self._size, size=batch_size)
            arrays = (
                self._states[idx],
                self._actions[idx],
                self._next_states[idx],
                self._skills[idx],
                self._dones[idx],
                self._rewards[idx],
            )
        return TransitionBatch(*(torch.as_tensor(a, dtype=dtype) for a in arrays))

    def oldest_state(self) -> np.ndarray:
        with self._lock:
            start = self._ptr if self._size == self.capacity else 0
            return self._states[start].copy()
