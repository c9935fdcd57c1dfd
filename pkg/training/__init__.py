from .checkpointing import Bundle, build_bundle, env_from_config, load_bundle, save_bundle, torch_dtype
from .pretrain import PHASES, SusdTrainer, collect_episode

__all__ = [
    "Bundle",
    "PHASES",
    "SusdTrainer",
    "build_bundle",
    "collect_episode",
    "env_from_config",
    "load_bundle",
    "save_bundle",
    "torch_dtype",
]
