from .checkpoint import load_arrays, load_module_arrays, module_arrays, save_arrays
from .errors import (
    ConfigError,
    ContractError,
    DimensionError,
    SusdError,
    TrainingDivergenceError,
    UnsupportedModeError,
)
from .gradcheck import central_differences, max_gradient_error
from .nets import Mlp, as_tensor, backward, forward, hidden_layout
from .optim import AdamState, adam_step, minimize
from .seeding import child_seed, seed_everything, torch_generator

__all__ = [
    "AdamState",
    "ConfigError",
    "ContractError",
    "DimensionError",
    "Mlp",
    "SusdError",
    "TrainingDivergenceError",
    "UnsupportedModeError",
    "adam_step",
    "as_tensor",
    "backward",
    "central_differences",
    "child_seed",
    "forward",
    "hidden_layout",
    "load_arrays",
    "load_module_arrays",
    "max_gradient_error",
    "minimize",
    "module_arrays",
    "save_arrays",
    "seed_everything",
    "torch_generator",
]
