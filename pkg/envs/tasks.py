"""Downstream task rewards layered over the reward-free environments.

Tasks are stateful (an instruction sampled per episode, progress through
it) but read everything else from consecutive states, so the same reward
function serves flat rollouts and the high-level controller.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional

import numpy as np

from .base import BaseEnv
from .gunner import TARGET_HITS, GunnerEnv
from .multiparticle import MultiParticleEnv, interacting_agents
from .pointnav import PointNavEnv

logger = logging.getLogger(__name__)

SEQ_INSTRUCTION_LENGTH = 4
FP_INSTRUCTION_LENGTH = 10


class UnknownTaskError(KeyError):
    pass


class TaskEnvMismatchError(ValueError):
    pass


class DownstreamTask(ABC):
    name: str = "task"
    instruction_dim: int = 0
    env_type: type = BaseEnv

    def __init__(self):
        self.rng = np.random.default_rng(0)

    @property
    def env_overrides(self) -> Dict[str, Any]:
        """Constructor overrides the task needs from its environment."""
        return {}

    def check_env(self, env: BaseEnv) -> None:
        if not isinstance(env, self.env_type):
            raise TaskEnvMismatchError(f"task {self.name!r} cannot run on env {env.name!r}")

    def reset(self, env: BaseEnv, state: np.ndarray, rng: np.random.Generator) -> None:
        self.check_env(env)
        self.rng = rng

    @abstractmethod
    def reward(self, state: np.ndarray, action: np.ndarray, prev_state: np.ndarray) -> float:
        pass

    def instruction(self) -> np.ndarray:
        return np.zeros(self.instruction_dim)


class RewardFreeTask(DownstreamTask):
    name = "reward-free"

    def reward(self, state, action, prev_state) -> float:
        return 0.0


class SequentialInteractionTask(DownstreamTask):
    """Agents must interact with their stations in the instructed order.

    +1 for the next agent in the sequence, -1 for any other interaction
    (including every interaction once the sequence is complete).
    Interactions are read from the station activations on every step, so
    an agent that keeps interacting is scored again on each step: the
    first step at the right station pays +1 and every held step after it
    is out of sequence and costs -1.
    """

    instruction_dim = SEQ_INSTRUCTION_LENGTH + 1
    env_type = MultiParticleEnv

    def __init__(self, length: int, name: str):
        super().__init__()
        self.length = length
        self.name = name
        self.n_agents = 0
        self.sequence = np.zeros(0, dtype=int)
        self.progress = 0

    def check_env(self, env: BaseEnv) -> None:
        super().check_env(env)
        if self.length > env.n_agents:
            raise TaskEnvMismatchError(
                f"task {self.name!r} needs a sequence of {self.length} distinct agents, env has {env.n_agents}"
            )

    def reset(self, env, state, rng) -> None:
        super().reset(env, state, rng)
        self.n_agents = env.n_agents
        self.sequence = rng.choice(self.n_agents, size=self.length, replace=False)
        self.progress = 0

    def reward(self, state, action, prev_state) -> float:
        total = 0.0
        for agent in interacting_agents(state, self.n_agents):
            if self.progress < self.length and agent == self.sequence[self.progress]:
                total += 1.0
                self.progress += 1
            else:
                total -= 1.0
        return total

    def instruction(self) -> np.ndarray:
        vec = np.zeros(self.instruction_dim)
        vec[: self.length] = (self.sequence + 1) / max(self.n_agents, 1)
        vec[-1] = self.progress / self.length
        return vec


class FoodPoisonTask(DownstreamTask):
    """Station i (i < length) delivers food (+1, first interaction only) or
    poison (-1, every interaction) according to a binary indicator drawn per
    episode. Stations past the indicator sequence are neutral.

    Poison is charged on every step its station is active, so a held
    interaction costs -1 per step; food pays only on the first step.
    """

    instruction_dim = FP_INSTRUCTION_LENGTH
    env_type = MultiParticleEnv

    def __init__(self, length: int, name: str):
        super().__init__()
        self.length = length
        self.name = name
        self.n_agents = 0
        self.food = np.zeros(0, dtype=bool)
        self.eaten = np.zeros(0, dtype=bool)

    def check_env(self, env: BaseEnv) -> None:
        super().check_env(env)
        if self.length > env.n_agents:
            raise TaskEnvMismatchError(
                f"task {self.name!r} has {self.length} indicators, env has only {env.n_agents} stations"
            )

    def reset(self, env, state, rng) -> None:
        super().reset(env, state, rng)
        self.n_agents = env.n_agents
        self.food = rng.integers(0, 2, size=self.length).astype(bool)
        self.eaten = np.zeros(self.length, dtype=bool)

    def reward(self, state, action, prev_state) -> float:
        total = 0.0
        for agent in interacting_agents(state, self.n_agents):
            if agent >= self.length:
                continue
            if not self.food[agent]:
                total -= 1.0
            elif not self.eaten[agent]:
                total += 1.0
                self.eaten[agent] = True
        return total

    def instruction(self) -> np.ndarray:
        vec = np.zeros(self.instruction_dim)
        vec[: self.length] = np.where(self.food, 1.0, -1.0)
        return vec


class GunnerShootingTask(DownstreamTask):
    """+1 per target hit. With limited ammo the agent starts empty and must
    collect ammo before firing."""

    env_type = GunnerEnv

    def __init__(self, limited_ammo: bool):
        super().__init__()
        self.limited_ammo = limited_ammo
        self.name = "gunner-lim" if limited_ammo else "gunner-unlim"

    @property
    def env_overrides(self) -> Dict[str, Any]:
        if self.limited_ammo:
            return {"unlimited_ammo": False, "initial_ammo": 0}
        return {"unlimited_ammo": True}

    def reward(self, state, action, prev_state) -> float:
        return float(state[TARGET_HITS] - prev_state[TARGET_HITS])


class PointNavGoalTask(DownstreamTask):
    """Reach a goal within `radius`; each success pays `success_reward` and
    draws a new goal. With `window` set, goals are drawn around the agent
    and expire after `timeout` steps (multi-goal variant); otherwise they
    are drawn from the whole arena. With `max_goals` set, no goal is drawn
    after that many have been issued (reached or expired) and the task
    pays nothing more for the episode."""

    instruction_dim = 2
    env_type = PointNavEnv

    def __init__(
        self,
        name: str,
        radius: float = 3.0,
        success_reward: float = 10.0,
        window: Optional[float] = None,
        timeout: Optional[int] = None,
        max_goals: Optional[int] = None,
    ):
        super().__init__()
        self.name = name
        self.radius = radius
        self.success_reward = success_reward
        self.window = window
        self.timeout = timeout
        self.max_goals = max_goals
        self.bounds = PointNavEnv.position_bounds
        self.goal = np.zeros(2)
        self.goal_age = 0
        self.goals_reached = 0
        self.goals_issued = 0
        self.exhausted = False

    def reset(self, env, state, rng) -> None:
        super().reset(env, state, rng)
        self.bounds = env.position_bounds
        self.goals_reached = 0
        self.goals_issued = 0
        self.exhausted = False
        self._new_goal(state)

    def _new_goal(self, state: np.ndarray) -> None:
        low, high = self.bounds
        if self.window is None:
            self.goal = self.rng.uniform(low, high, size=2)
        else:
            centre = state[0:2]
            self.goal = np.clip(self.rng.uniform(centre - self.window, centre + self.window), low, high)
        self.goal_age = 0
        self.goals_issued += 1

    def _advance(self, state: np.ndarray) -> None:
        if self.max_goals is not None and self.goals_issued >= self.max_goals:
            self.exhausted = True
        else:
            self._new_goal(state)

    def goal_state(self, state: np.ndarray) -> np.ndarray:
        """State-space goal: the agent at the goal position, at rest."""
        goal = np.zeros_like(state)
        goal[0:2] = self.goal
        return goal

    def reward(self, state, action, prev_state) -> float:
        if self.exhausted:
            return 0.0
        self.goal_age += 1
        if np.linalg.norm(state[0:2] - self.goal) <= self.radius:
            self.goals_reached += 1
            self._advance(state)
            return self.success_reward
        if self.timeout is not None and self.goal_age >= self.timeout:
            self._advance(state)
        return 0.0

    def instruction(self) -> np.ndarray:
        return self.goal / self.bounds[1]


TASK_REGISTRY: Dict[str, Callable[[], DownstreamTask]] = {
    "reward-free": RewardFreeTask,
    "seq-easy": lambda: SequentialInteractionTask(2, "seq-easy"),
    "seq-medium": lambda: SequentialInteractionTask(3, "seq-medium"),
    "seq-hard": lambda: SequentialInteractionTask(4, "seq-hard"),
    "fp-easy": lambda: FoodPoisonTask(2, "fp-easy"),
    "fp-medium": lambda: FoodPoisonTask(5, "fp-medium"),
    "fp-hard": lambda: FoodPoisonTask(8, "fp-hard"),
    "fp-difficult": lambda: FoodPoisonTask(10, "fp-difficult"),
    "gunner-unlim": lambda: GunnerShootingTask(limited_ammo=False),
    "gunner-lim": lambda: GunnerShootingTask(limited_ammo=True),
    "pointnav-goal": lambda: PointNavGoalTask("pointnav-goal", radius=3.0, success_reward=10.0),
    "pointnav-multigoal": lambda: PointNavGoalTask(
        "pointnav-multigoal", radius=3.0, success_reward=2.5, window=7.5, timeout=50, max_goals=4
    ),
}


def make_task(name: str) -> DownstreamTask:
    try:
        factory = TASK_REGISTRY[name]
    except KeyError:
        raise UnknownTaskError(f"unknown task {name!r}; expected one of {sorted(TASK_REGISTRY)}") from None
    return factory()


def downstream_reward(task: DownstreamTask, state: np.ndarray, action: np.ndarray, prev_state: np.ndarray) -> float:
    return task.reward(np.asarray(state), np.asarray(action), np.asarray(prev_state))
