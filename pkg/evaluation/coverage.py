"""State-coverage metrics over agent (x, y) positions.

Unique-state coverage rounds every coordinate to two decimals and counts
distinct pairs; bin coverage is the fraction of a b×b grid over the
environment's position bounds that was visited. Both are computed per
agent, then reduced to the worst (min) and mean agent.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from envs import BaseEnv
from skills import SkillPrior, sample_skill
from tensormath import child_seed, torch_generator

logger = logging.getLogger(__name__)

ROUND_DECIMALS = 2


def round_positions(positions: np.ndarray) -> np.ndarray:
    # + 0.0 folds -0.0 into 0.0
    return np.round(np.asarray(positions, dtype=np.float64), ROUND_DECIMALS) + 0.0


def unique_state_count(positions: np.ndarray) -> int:
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    if len(positions) == 0:
        return 0
    return int(len(np.unique(round_positions(positions), axis=0)))


def bin_indices(positions: np.ndarray, bounds: Tuple[float, float], bins: int) -> np.ndarray:
    """Cell index per axis; out-of-bounds positions land in the edge cells."""
    low, high = bounds
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    idx = np.floor((positions - low) / (high - low) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def bin_fraction(positions: np.ndarray, bounds: Tuple[float, float], bins: int = 50) -> float:
    idx = bin_indices(positions, bounds, bins)
    if len(idx) == 0:
        return 0.0
    return len(np.unique(idx, axis=0)) / float(bins * bins)


@dataclass
class CoverageReport:
    counts: Dict[str, int]
    steps: int
    resample_every: int
    min: int = field(init=False)
    mean: float = field(init=False)

    def __post_init__(self):
        values = list(self.counts.values())
        self.min = int(min(values)) if values else 0
        self.mean = float(np.mean(values)) if values else 0.0

    def to_rows(self) -> List[Dict[str, object]]:
        rows = [{"factor": name, "unique_states": count} for name, count in self.counts.items()]
        rows.append({"factor": "worst_agent", "unique_states": self.min})
        rows.append({"factor": "mean_agent", "unique_states": self.mean})
        return rows


@dataclass
class BinCoverageReport:
    fractions: Dict[str, float]
    bins_per_axis: int
    steps: int
    min: float = field(init=False)
    mean: float = field(init=False)

    def __post_init__(self):
        values = list(self.fractions.values())
        self.min = float(min(values)) if values else 0.0
        self.mean = float(np.mean(values)) if values else 0.0

    def to_rows(self) -> List[Dict[str, object]]:
        rows = [{"factor": name, "bin_fraction": frac} for name, frac in self.fractions.items()]
        rows.append({"factor": "worst_agent", "bin_fraction": self.min})
        rows.append({"factor": "mean_agent", "bin_fraction": self.mean})
        return rows


def rollout_positions(
    agent,
    env: BaseEnv,
    prior: SkillPrior,
    steps: int = 20_000,
    resample_every: int = 200,
    seed: int = 0,
    stochastic: bool = True,
) -> Dict[str, np.ndarray]:
    """Visited (x, y) per agent over `steps` env steps, drawing a fresh skill
    every `resample_every` steps and resetting whenever an episode ends."""
    rng = np.random.default_rng(child_seed(seed, 7))
    generator = torch_generator(child_seed(seed, 8))
    resets = 0
    state = env.reset(child_seed(seed, resets))
    visited: Dict[str, List[np.ndarray]] = {k: [v.copy()] for k, v in env.agent_positions(state).items()}
    skill = sample_skill(prior, rng).flat()

    for t in range(steps):
        if t and t % resample_every == 0:
            skill = sample_skill(prior, rng).flat()
        step = env.step(agent.act(state, skill, stochastic=stochastic, generator=generator))
        state = step.next_state
        for name, pos in env.agent_positions(state).items():
            visited[name].append(pos.copy())
        if step.done:
            resets += 1
            state = env.reset(child_seed(seed, resets))
    return {name: np.stack(points) for name, points in visited.items()}


def coverage_from_positions(positions: Dict[str, np.ndarray], steps: int = 0, resample_every: int = 0) -> CoverageReport:
    return CoverageReport({k: unique_state_count(v) for k, v in positions.items()}, steps, resample_every)


def bins_from_positions(
    positions: Dict[str, np.ndarray], bounds: Tuple[float, float], bins: int = 50, steps: int = 0
) -> BinCoverageReport:
    return BinCoverageReport({k: bin_fraction(v, bounds, bins) for k, v in positions.items()}, bins, steps)


def state_coverage(
    agent, env: BaseEnv, prior: SkillPrior, steps: int = 20_000, resample_every: int = 200, seed: int = 0
) -> CoverageReport:
    positions = rollout_positions(agent, env, prior, steps, resample_every, seed)
    report = coverage_from_positions(positions, steps, resample_every)
    logger.info("coverage: worst agent %d, mean %.1f unique states over %d steps", report.min, report.mean, steps)
    return report


def bin_coverage(
    agent,
    env: BaseEnv,
    prior: SkillPrior,
    bins_per_axis: int = 50,
    steps: int = 20_000,
    resample_every: int = 200,
    seed: int = 0,
    bounds: Optional[Tuple[float, float]] = None,
) -> BinCoverageReport:
    positions = rollout_positions(agent, env, prior, steps, resample_every, seed)
    return bins_from_positions(positions, bounds or env.position_bounds, bins_per_axis, steps)
