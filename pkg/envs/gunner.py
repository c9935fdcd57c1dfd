"""2D-Gunner: an agent moves on the square [-1, 1]², collects ammo and shoots
a target.

Observation (18 dims, 3 factors of 6):
  agent  [0:6]   x, y, sin(heading), cos(heading), ammo count, fire cooldown
  ammo   [6:12]  pickup x, pickup y, available flag, respawn timer, 0, 0
  target [12:18] x, y, alive flag, hit count, 0, 0

Action (6 dims): [0:2] movement, [2:5] interaction logits (argmax picks
idle / pick up ammo / fire), [5] shooting direction (heading = π·a5).

Movement is kinematic: one step moves the agent by speed·dt·a[0:2].
"""

from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from .base import AGENT_TAG, BaseEnv, FactorSpec

IDLE, PICKUP, FIRE = 0, 1, 2

AGENT_X, AGENT_Y, SIN_H, COS_H, AMMO_COUNT, COOLDOWN = range(0, 6)
AMMO_X, AMMO_Y, AMMO_AVAILABLE, AMMO_TIMER = range(6, 10)
TARGET_X, TARGET_Y, TARGET_ALIVE, TARGET_HITS = range(12, 16)


@dataclass
class GunnerConfig:
    speed: float = 1.0
    dt: float = 0.1
    pickup_radius: float = 0.15
    shoot_range: float = 0.6
    aim_tolerance: float = 0.25
    fire_cooldown: int = 5
    ammo_respawn: int = 20
    max_ammo: int = 5
    initial_ammo: int = 0
    unlimited_ammo: bool = False


def _wrap_angle(angle: float) -> float:
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


class GunnerEnv(BaseEnv):
    name = "gunner"
    observation_dim = 18
    action_dim = 6
    position_bounds = (-1.0, 1.0)

    def __init__(self, episode_length: int = 200, **overrides: Any):
        super().__init__(episode_length)
        self.config = GunnerConfig(**overrides)
        self._spec = FactorSpec.from_sizes(
            ["agent", "ammo", "target"], [6, 6, 6], tags=[(AGENT_TAG,), ("ammo",), ("target",)]
        )

    @property
    def factor_spec(self) -> FactorSpec:
        return self._spec

    def _random_point(self, margin: float = 0.8) -> np.ndarray:
        return self._rng.uniform(-margin, margin, size=2)

    def _initial_state(self) -> np.ndarray:
        state = np.zeros(self.observation_dim)
        state[AGENT_X:AGENT_Y + 1] = self._random_point()
        state[COS_H] = 1.0
        state[AMMO_COUNT] = self.config.initial_ammo
        state[AMMO_X:AMMO_Y + 1] = self._random_point()
        state[AMMO_AVAILABLE] = 1.0
        state[TARGET_X:TARGET_Y + 1] = self._random_point()
        state[TARGET_ALIVE] = 1.0
        return state

    def _transition(self, action: np.ndarray) -> Tuple[np.ndarray, Dict[str, Any]]:
        cfg = self.config
        s = self._state.copy()
        info = {"picked_up": False, "fired": False, "hit": False}

        if s[TARGET_ALIVE] == 0.0:
            s[TARGET_X:TARGET_Y + 1] = self._random_point()
            s[TARGET_ALIVE] = 1.0

        s[AGENT_X:AGENT_Y + 1] = np.clip(s[AGENT_X:AGENT_Y + 1] + cfg.speed * cfg.dt * action[0:2], -1.0, 1.0)
        heading = np.pi * action[5]
        s[SIN_H], s[COS_H] = np.sin(heading), np.cos(heading)
        s[COOLDOWN] = max(0.0, s[COOLDOWN] - 1.0)

        interaction = int(np.argmax(action[2:5]))
        agent_xy = s[AGENT_X:AGENT_Y + 1]

        if s[AMMO_AVAILABLE] == 1.0:
            near = np.linalg.norm(s[AMMO_X:AMMO_Y + 1] - agent_xy) < cfg.pickup_radius
            if interaction == PICKUP and near:
                s[AMMO_COUNT] = min(cfg.max_ammo, s[AMMO_COUNT] + 1.0)
                s[AMMO_AVAILABLE] = 0.0
                s[AMMO_TIMER] = float(cfg.ammo_respawn)
                info["picked_up"] = True
        else:
            s[AMMO_TIMER] = max(0.0, s[AMMO_TIMER] - 1.0)
            if s[AMMO_TIMER] == 0.0:
                s[AMMO_X:AMMO_Y + 1] = self._random_point()
                s[AMMO_AVAILABLE] = 1.0

        can_fire = s[COOLDOWN] == 0.0 and (cfg.unlimited_ammo or s[AMMO_COUNT] >= 1.0)
        if interaction == FIRE and can_fire:
            info["fired"] = True
            s[COOLDOWN] = float(cfg.fire_cooldown)
            if not cfg.unlimited_ammo:
                s[AMMO_COUNT] -= 1.0
            offset = s[TARGET_X:TARGET_Y + 1] - agent_xy
            distance = float(np.linalg.norm(offset))
            bearing = float(np.arctan2(offset[1], offset[0]))
            aimed = abs(_wrap_angle(bearing - heading)) < cfg.aim_tolerance
            if s[TARGET_ALIVE] == 1.0 and distance < cfg.shoot_range and aimed:
                s[TARGET_ALIVE] = 0.0
                s[TARGET_HITS] += 1.0
                info["hit"] = True

        return s, info

    def agent_positions(self, state: np.ndarray) -> Dict[str, np.ndarray]:
        return {"agent": np.asarray(state[AGENT_X:AGENT_Y + 1])}
