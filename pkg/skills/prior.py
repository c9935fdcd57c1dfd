from dataclasses import dataclass
from enum import Enum

import numpy as np

from tensormath.errors import ContractError, DimensionError


class SkillMode(str, Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


@dataclass
class SkillVector:
    """Block-structured skill: one D-dim block per factor.

    Continuous blocks are any finite vectors; discrete blocks are one-hot.
    """

    blocks: np.ndarray
    mode: SkillMode = SkillMode.CONTINUOUS

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=np.float64)
        self.mode = SkillMode(self.mode)
        if self.blocks.ndim != 2:
            raise DimensionError(f"skill blocks must be (N, D), got shape {self.blocks.shape}")
        if not np.all(np.isfinite(self.blocks)):
            raise ContractError("skill blocks must be finite")
        if self.mode is SkillMode.DISCRETE:
            one_hot = np.isin(self.blocks, (0.0, 1.0)).all() and np.all(self.blocks.sum(axis=1) == 1.0)
            if not one_hot:
                raise ContractError("discrete skill blocks must be one-hot per factor")

    @property
    def n_factors(self) -> int:
        return self.blocks.shape[0]

    @property
    def dim(self) -> int:
        return self.blocks.shape[1]

    def flat(self) -> np.ndarray:
        return self.blocks.reshape(-1).copy()

    def indices(self) -> np.ndarray:
        if self.mode is not SkillMode.DISCRETE:
            raise ContractError("indices() is only defined for discrete skills")
        return self.blocks.argmax(axis=1)

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_factors: int, dim: int, mode: SkillMode = SkillMode.CONTINUOUS) -> "SkillVector":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (n_factors * dim,):
            raise DimensionError(f"flat skill has shape {flat.shape}, expected ({n_factors * dim},)")
        return cls(flat.reshape(n_factors, dim), mode)


@dataclass(frozen=True)
class SkillPrior:
    n_factors: int
    dim: int
    mode: SkillMode = SkillMode.CONTINUOUS

    @property
    def skill_dim(self) -> int:
        return self.n_factors * self.dim


def sample_skill(prior: SkillPrior, rng: np.random.Generator) -> SkillVector:
    """Standard normal per coordinate, or a uniform one-hot per factor."""
    if prior.mode is SkillMode.CONTINUOUS:
        return SkillVector(rng.standard_normal((prior.n_factors, prior.dim)), prior.mode)
    blocks = np.zeros((prior.n_factors, prior.dim))
    blocks[np.arange(prior.n_factors), rng.integers(0, prior.dim, size=prior.n_factors)] = 1.0
    return SkillVector(blocks, prior.mode)
