from .embedding import (
    DualUpdater,
    EmbeddingBank,
    constraint_slack,
    discrete_contrast,
    discrete_factor_reward,
    displacement_norms,
    factor_reward,
    lambda_objective,
    phi_objective,
    total_intrinsic_reward,
    zero_shot_skill,
)
from .prior import SkillMode, SkillPrior, SkillVector, sample_skill

__all__ = [
    "DualUpdater",
    "EmbeddingBank",
    "SkillMode",
    "SkillPrior",
    "SkillVector",
    "constraint_slack",
    "discrete_contrast",
    "discrete_factor_reward",
    "displacement_norms",
    "factor_reward",
    "lambda_objective",
    "phi_objective",
    "sample_skill",
    "total_intrinsic_reward",
    "zero_shot_skill",
]
