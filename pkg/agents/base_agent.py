import logging
from abc import ABC, abstractmethod
from typing import Dict, Optional

import numpy as np
import torch

logger = logging.getLogger(__name__)


class BaseAgent(ABC):
    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def act(
        self,
        state: np.ndarray,
        skill: np.ndarray,
        stochastic: bool = True,
        generator: Optional[torch.Generator] = None,
    ) -> np.ndarray:
        """Pick an action for `state` under `skill`."""

    @abstractmethod
    def update(self, buffer, reward_fn=None, batch_size: int = 256, grad_steps: int = 50, rng=None) -> Dict[str, float]:
        """Run `grad_steps` gradient updates and return loss summaries."""

    def log_decision(self, decision: str, value: float):
        """Debug trace of agent-level decisions (update summaries, resets)."""
        logger.debug("[%s] %s (%.4f)", self.name, decision, value)
