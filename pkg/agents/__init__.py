from .base_agent import BaseAgent
from .replay_buffer import ReplayBuffer, TransitionBatch
from .sac_agent import SacAgent, bellman_target, polyak_update, tanh_log_det

__all__ = [
    "BaseAgent",
    "ReplayBuffer",
    "SacAgent",
    "TransitionBatch",
    "bellman_target",
    "polyak_update",
    "tanh_log_det",
]
