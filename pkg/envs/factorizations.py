"""Named alternatives to an environment's native factorization.

Used for the single-embedding ablation and for over/under-factorization
runs. Every result is still a FactorSpec, so the partition invariant is
checked on construction.
"""

from typing import List

import numpy as np

from tensormath.errors import ConfigError

from .base import AGENT_TAG, BaseEnv, Factor, FactorSpec
from .gunner import GunnerEnv
from .multiparticle import PAIR_OBS, MultiParticleEnv

FACTORIZATIONS = ("native", "single", "gunner-over4", "gunner-under2", "mp-separate")


def _single(env: BaseEnv) -> FactorSpec:
    tags = (AGENT_TAG,) if len(env.factor_spec.agent_factor_indices()) == 1 else ()
    return FactorSpec((Factor("state", 0, env.observation_dim, tags),))


def _gunner_over4(env: BaseEnv, seed: int) -> FactorSpec:
    agent, ammo, target = env.factor_spec.factors
    cut = int(np.random.default_rng(seed).integers(agent.start + 1, agent.stop))
    return FactorSpec(
        (
            Factor("agent_a", agent.start, cut, agent.tags),
            Factor("agent_b", cut, agent.stop, agent.tags),
            ammo,
            target,
        )
    )


def _gunner_under2(env: BaseEnv) -> FactorSpec:
    agent, ammo, target = env.factor_spec.factors
    return FactorSpec((Factor("agent_ammo", agent.start, ammo.stop, agent.tags), target))


def _mp_separate(env: MultiParticleEnv) -> FactorSpec:
    factors: List[Factor] = []
    for i in range(env.n_agents):
        base = i * PAIR_OBS
        factors.append(Factor(f"agent_{i}", base, base + 4, (AGENT_TAG,)))
        factors.append(Factor(f"station_{i}", base + 4, base + PAIR_OBS, ("station",)))
    return FactorSpec(tuple(factors))


def resolve_factorization(env: BaseEnv, name: str = "native", seed: int = 0) -> FactorSpec:
    if name == "native":
        return env.factor_spec
    if name == "single":
        return _single(env)
    if name in ("gunner-over4", "gunner-under2"):
        if not isinstance(env, GunnerEnv):
            raise ConfigError(f"factorization {name!r} only applies to gunner, not {env.name!r}", "skills.factorization")
        return _gunner_over4(env, seed) if name == "gunner-over4" else _gunner_under2(env)
    if name == "mp-separate":
        if not isinstance(env, MultiParticleEnv):
            raise ConfigError(f"factorization {name!r} only applies to multiparticle, not {env.name!r}", "skills.factorization")
        return _mp_separate(env)
    raise ConfigError(f"unknown factorization {name!r}; expected one of {list(FACTORIZATIONS)}", "skills.factorization")
