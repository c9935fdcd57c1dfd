from typing import Any, Callable, Dict

from .base import AGENT_TAG, BaseEnv, EnvStep, Factor, FactorSpec, Transition, factor_slice
from .factorizations import FACTORIZATIONS, resolve_factorization
from .gunner import GunnerEnv
from .multiparticle import MultiParticleEnv
from .pointnav import PointNavEnv
from .tasks import (
    DownstreamTask,
    TaskEnvMismatchError,
    UnknownTaskError,
    downstream_reward,
    make_task,
)


class UnknownEnvError(KeyError):
    pass


ENV_REGISTRY: Dict[str, Callable[..., BaseEnv]] = {
    "gunner": lambda **kw: GunnerEnv(**{"episode_length": 200, **kw}),
    "multiparticle": lambda **kw: MultiParticleEnv(**{"n_agents": 10, "episode_length": 200, **kw}),
    "multiparticle-mini": lambda **kw: MultiParticleEnv(**{"n_agents": 3, "episode_length": 50, **kw}),
    "pointnav": lambda **kw: PointNavEnv(**{"episode_length": 200, **kw}),
}


def make_env(name: str, **overrides: Any) -> BaseEnv:
    try:
        factory = ENV_REGISTRY[name]
    except KeyError:
        raise UnknownEnvError(f"unknown env {name!r}; expected one of {sorted(ENV_REGISTRY)}") from None
    env = factory(**{k: v for k, v in overrides.items() if v is not None})
    env.name = name
    return env


__all__ = [
    "AGENT_TAG",
    "BaseEnv",
    "DownstreamTask",
    "ENV_REGISTRY",
    "EnvStep",
    "FACTORIZATIONS",
    "Factor",
    "FactorSpec",
    "GunnerEnv",
    "MultiParticleEnv",
    "PointNavEnv",
    "TaskEnvMismatchError",
    "Transition",
    "UnknownEnvError",
    "UnknownTaskError",
    "downstream_reward",
    "factor_slice",
    "make_env",
    "make_task",
]
