import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List

import numpy as np

from envs import DownstreamTask, downstream_reward, make_task
from skills import SkillMode, zero_shot_skill
from tensormath import child_seed
from tensormath.errors import UnsupportedModeError
from training.checkpointing import Bundle, env_from_config

logger = logging.getLogger(__name__)


@dataclass
class ZeroShotReport:
    task: str
    budget: int
    per_seed: List[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_seed))

    @property
    def std(self) -> float:
        return float(np.std(self.per_seed))

    def to_rows(self):
        return [{"seed": i, "reward": r} for i, r in enumerate(self.per_seed)]


def zero_shot_episode(bundle: Bundle, task: DownstreamTask, budget: int, seed: int) -> float:
    """Accumulated goal reward over `budget` steps, recomputing the skill
    from the current state and goal at every step."""
    if bundle.prior.mode is SkillMode.DISCRETE:
        raise UnsupportedModeError("zero-shot goal reaching needs a continuous-skill checkpoint")
    if not hasattr(task, "goal_state"):
        raise UnsupportedModeError(f"task {task.name!r} has no goals to reach")
    env = env_from_config(bundle.config)
    task.check_env(env)
    if task.env_overrides:
        env = env_from_config(bundle.config, **task.env_overrides)

    resets = 0
    state = env.reset(child_seed(seed, resets))
    task.reset(env, state, np.random.default_rng(child_seed(seed, 21)))
    total = 0.0
    for _ in range(budget):
        z = zero_shot_skill(bundle.bank, bundle.spec, state, task.goal_state(state)).flat()
        action = bundle.agent.act(state, z, stochastic=False)
        step = env.step(action)
        total += downstream_reward(task, step.next_state, action, state)
        state = step.next_state
        if step.done:
            resets += 1
            state = env.reset(child_seed(seed, resets))
    return total


def zero_shot_eval(
    bundle: Bundle, task_name: str = "pointnav-goal", budget: int = 20_000, seeds: int = 8, workers: int = 1
) -> ZeroShotReport:
    if bundle.prior.mode is SkillMode.DISCRETE:
        raise UnsupportedModeError("zero-shot goal reaching needs a continuous-skill checkpoint")

    def run(seed: int) -> float:
        return zero_shot_episode(bundle, make_task(task_name), budget, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(run, range(seeds)))
    else:
        per_seed = [run(seed) for seed in range(seeds)]
    report = ZeroShotReport(task_name, budget, per_seed)
    logger.info("zero-shot %s: %.2f ± %.2f over %d seeds", task_name, report.mean, report.std, seeds)
    return report
