from .controller import (
    HrlStep,
    aggregate_curves,
    build_high_level,
    high_observation,
    hrl_step,
    run_downstream,
    skill_from_action,
    train_downstream,
)

__all__ = [
    "HrlStep",
    "aggregate_curves",
    "build_high_level",
    "high_observation",
    "hrl_step",
    "run_downstream",
    "skill_from_action",
    "train_downstream",
]
