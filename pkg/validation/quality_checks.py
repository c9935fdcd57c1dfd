from typing import List, Sequence, Tuple
import logging

import numpy as np

from envs.base import Transition

logger = logging.getLogger(__name__)


class TransitionChecker:
    def __init__(self, obs_dim: int, action_dim: int, skill_dim: int, action_bound: float = 1.0):
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.skill_dim = skill_dim
        self.action_bound = action_bound

    def validate_episode(self, transitions: Sequence[Transition]) -> Tuple[bool, List[str]]:
        """Run sanity checks on one collected episode."""
        errors = []

        if not transitions:
            errors.append("Episode contains no transitions")
            return False, errors

        for t, tr in enumerate(transitions):
            if np.asarray(tr.state).shape != (self.obs_dim,):
                errors.append(f"Step {t}: state shape {np.asarray(tr.state).shape}, expected ({self.obs_dim},)")
            if not np.all(np.isfinite(tr.next_state)):
                errors.append(f"Step {t}: non-finite next state")
            action = np.asarray(tr.action)
            if action.shape != (self.action_dim,):
                errors.append(f"Step {t}: action shape {action.shape}, expected ({self.action_dim},)")
            elif np.any(np.abs(action) > self.action_bound):
                errors.append(f"Step {t}: action outside [-{self.action_bound}, {self.action_bound}]")

        # one skill per episode
        first = np.asarray(transitions[0].skill)
        if first.shape != (self.skill_dim,):
            errors.append(f"Skill shape {first.shape}, expected ({self.skill_dim},)")
        elif any(not np.array_equal(first, tr.skill) for tr in transitions[1:]):
            errors.append("Skill changes within the episode")

        # consecutive transitions chain
        for t in range(1, len(transitions)):
            if not np.array_equal(transitions[t - 1].next_state, transitions[t].state):
                errors.append(f"Step {t}: state does not continue from the previous next state")
                break

        is_valid = len(errors) == 0
        if not is_valid:
            logger.warning(f"Validation failed for episode: {errors}")

        return is_valid, errors
