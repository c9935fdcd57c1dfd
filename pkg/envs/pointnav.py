from typing import Any, Dict, Tuple

import numpy as np

from .base import AGENT_TAG, BaseEnv, FactorSpec


class PointNavEnv(BaseEnv):
    """Unfactorized point mass on [-10, 10]² with damped double-integrator
    dynamics. State is (x, y, vx, vy); action is a 2-dim acceleration.
    """

    name = "pointnav"
    observation_dim = 4
    action_dim = 2
    position_bounds = (-10.0, 10.0)

    def __init__(
        self,
        episode_length: int = 200,
        dt: float = 0.1,
        damping: float = 0.9,
        accel_scale: float = 5.0,
    ):
        super().__init__(episode_length)
        self.dt = dt
        self.damping = damping
        self.accel_scale = accel_scale
        self._spec = FactorSpec.from_sizes(["agent"], [4], tags=[(AGENT_TAG,)])

    @property
    def factor_spec(self) -> FactorSpec:
        return self._spec

    def _initial_state(self) -> np.ndarray:
        state = np.zeros(4)
        state[0:2] = self._rng.uniform(-1.0, 1.0, size=2)
        return state

    def _transition(self, action: np.ndarray) -> Tuple[np.ndarray, Dict[str, Any]]:
        s = self._state.copy()
        velocity = self.damping * s[2:4] + self.accel_scale * action * self.dt
        low, high = self.position_bounds
        s[0:2] = np.clip(s[0:2] + velocity * self.dt, low, high)
        s[2:4] = velocity
        return s, {}

    def agent_positions(self, state: np.ndarray) -> Dict[str, np.ndarray]:
        return {"agent": np.asarray(state[0:2])}
