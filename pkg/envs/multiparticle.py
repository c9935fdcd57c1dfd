"""Multi-Particle: M point-mass agents, each paired with its own station.

Each agent-station pair contributes 7 observation dims
(agent x, y, vx, vy, station activation, station dx, station dy), where
(dx, dy) is the station position relative to the agent, and takes 5 action
dims (2 accelerations + 3 interaction logits: idle / interact / release).
Agents never touch each other's block, so agent i's action only changes
factor i.

An interaction within `interact_radius` sets the station activation to
exactly 1.0; otherwise the activation decays by `activation_decay` per step
("release" zeroes it). Downstream tasks detect interactions from the state
alone through the 1.0 value.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from .base import AGENT_TAG, BaseEnv, FactorSpec

PAIR_OBS = 7
PAIR_ACT = 5
IDLE, INTERACT, RELEASE = 0, 1, 2
ACTIVATION = 4


@dataclass
class ParticleConfig:
    dt: float = 0.1
    damping: float = 0.9
    accel_scale: float = 1.0
    interact_radius: float = 0.2
    activation_decay: float = 0.9


class MultiParticleEnv(BaseEnv):
    position_bounds = (-1.0, 1.0)

    def __init__(self, n_agents: int = 10, episode_length: int = 200, **overrides: Any):
        super().__init__(episode_length)
        if n_agents < 1:
            raise ValueError(f"n_agents must be >= 1, got {n_agents}")
        self.n_agents = int(n_agents)
        self.config = ParticleConfig(**overrides)
        self.name = "multiparticle" if self.n_agents == 10 else f"multiparticle-{self.n_agents}"
        self.observation_dim = PAIR_OBS * self.n_agents
        self.action_dim = PAIR_ACT * self.n_agents
        self._stations = np.zeros((self.n_agents, 2))
        self._spec = FactorSpec.from_sizes(
            [f"agent_{i}" for i in range(self.n_agents)],
            [PAIR_OBS] * self.n_agents,
            tags=[(AGENT_TAG, "station")] * self.n_agents,
        )

    @property
    def factor_spec(self) -> FactorSpec:
        return self._spec

    @property
    def stations(self) -> np.ndarray:
        return self._stations.copy()

    def _initial_state(self) -> np.ndarray:
        positions = self._rng.uniform(-0.9, 0.9, size=(self.n_agents, 2))
        self._stations = self._rng.uniform(-0.8, 0.8, size=(self.n_agents, 2))
        blocks = np.zeros((self.n_agents, PAIR_OBS))
        blocks[:, 0:2] = positions
        blocks[:, 5:7] = self._stations - positions
        return blocks.reshape(-1)

    def _transition(self, action: np.ndarray) -> Tuple[np.ndarray, Dict[str, Any]]:
        cfg = self.config
        blocks = self._state.reshape(self.n_agents, PAIR_OBS).copy()
        actions = action.reshape(self.n_agents, PAIR_ACT)
        interactions: List[int] = []

        velocity = cfg.damping * blocks[:, 2:4] + cfg.accel_scale * actions[:, 0:2] * cfg.dt
        position = np.clip(blocks[:, 0:2] + velocity * cfg.dt, -1.0, 1.0)
        blocks[:, 0:2] = position
        blocks[:, 2:4] = velocity
        blocks[:, 5:7] = self._stations - position

        for i in range(self.n_agents):
            choice = int(np.argmax(actions[i, 2:5]))
            near = np.linalg.norm(blocks[i, 5:7]) < cfg.interact_radius
            if choice == INTERACT and near:
                blocks[i, ACTIVATION] = 1.0
                interactions.append(i)
            elif choice == RELEASE:
                blocks[i, ACTIVATION] = 0.0
            else:
                blocks[i, ACTIVATION] *= cfg.activation_decay

        return blocks.reshape(-1), {"interactions": interactions}

    def agent_positions(self, state: np.ndarray) -> Dict[str, np.ndarray]:
        blocks = np.asarray(state).reshape(self.n_agents, PAIR_OBS)
        return {f"agent_{i}": blocks[i, 0:2] for i in range(self.n_agents)}


def interacting_agents(state: np.ndarray, n_agents: int) -> List[int]:
    blocks = np.asarray(state).reshape(n_agents, PAIR_OBS)
    return [i for i in range(n_agents) if blocks[i, ACTIVATION] == 1.0]
