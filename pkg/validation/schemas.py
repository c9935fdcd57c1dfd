from typing import List, Literal, Optional

import pandera as pa
from pandera.typing import Series
from pydantic import BaseModel, ConfigDict, Field

from skills.prior import SkillMode

Ablation = Literal["full", "susd-w", "susd-wf"]
Factorization = Literal["native", "single", "gunner-over4", "gunner-under2", "mp-separate"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class EnvConfig(_Section):
    name: str = "multiparticle-mini"
    episode_length: Optional[int] = Field(None, ge=1)
    n_agents: Optional[int] = Field(None, ge=1)


class SkillsConfig(_Section):
    dim: int = Field(2, ge=1)
    mode: SkillMode = SkillMode.CONTINUOUS
    factorization: Factorization = "native"
    hidden: int = Field(256, ge=1)
    hidden_layers: int = Field(2, ge=0)
    learning_rate: float = Field(1e-4, gt=0)
    lambda_learning_rate: float = Field(1e-4, gt=0)
    initial_lambda: float = Field(3000.0, ge=0)
    epsilon: float = Field(1e-6, gt=0)


class DensityConfig(_Section):
    hidden: int = Field(256, ge=1)
    hidden_layers: int = Field(2, ge=0)
    learning_rate: float = Field(1e-4, gt=0)
    grad_steps: int = Field(50, ge=0)
    batch_size: int = Field(256, ge=1)
    logvar_min: float = -10.0
    logvar_max: float = 4.0


class SacConfig(_Section):
    hidden: int = Field(256, ge=1)
    hidden_layers: int = Field(2, ge=0)
    learning_rate: float = Field(1e-4, gt=0)
    batch_size: int = Field(256, ge=1)
    gamma: float = Field(0.99, ge=0, le=1)
    tau: float = Field(0.995, ge=0, le=1)
    init_alpha: float = Field(0.1, gt=0)
    target_entropy: Optional[float] = None
    buffer_capacity: int = Field(1_000_000, ge=1)
    relabel_rewards: bool = True


class TrainerConfig(_Section):
    epochs: int = Field(10_000, ge=0)
    episodes_per_epoch: int = Field(8, ge=1)
    grad_steps: int = Field(50, ge=0)
    seed: int = 0
    ablation: Ablation = "full"
    num_workers: int = Field(1, ge=1)
    checkpoint_every: int = Field(100, ge=0)
    dtype: Literal["float32", "float64"] = "float32"


class HrlConfig(_Section):
    task: str = "reward-free"
    steps_per_skill: int = Field(5, ge=1)
    skill_range: float = Field(1.5, gt=0)
    epochs: int = Field(10_000, ge=0)
    episodes_per_epoch: int = Field(1, ge=1)
    grad_steps: int = Field(50, ge=0)
    batch_size: int = Field(256, ge=1)
    seeds: int = Field(3, ge=1)
    hidden: int = Field(256, ge=1)
    hidden_layers: int = Field(2, ge=0)
    learning_rate: float = Field(1e-4, gt=0)
    gamma: float = Field(0.99, ge=0, le=1)
    tau: float = Field(0.995, ge=0, le=1)
    init_alpha: float = Field(0.1, gt=0)
    buffer_capacity: int = Field(1_000_000, ge=1)


class EvalConfig(_Section):
    seed: int = 0
    coverage_steps: int = Field(20_000, ge=1)
    resample_every: int = Field(200, ge=1)
    bins_per_axis: int = Field(50, ge=1)
    decode_steps: int = Field(100_000, ge=10)
    decode_desk_scale: bool = False
    decode_desk_steps: int = Field(20_000, ge=10)
    decode_epochs: int = Field(100, ge=1)
    decode_batch_size: int = Field(1024, ge=1)
    decode_learning_rate: float = Field(1e-4, gt=0)
    hidden_candidates: Optional[List[int]] = None
    zero_shot_budget: int = Field(20_000, ge=1)
    zero_shot_seeds: int = Field(8, ge=1)


class ExperimentConfig(_Section):
    env: EnvConfig = Field(default_factory=EnvConfig)
    skills: SkillsConfig = Field(default_factory=SkillsConfig)
    density: DensityConfig = Field(default_factory=DensityConfig)
    sac: SacConfig = Field(default_factory=SacConfig)
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    hrl: HrlConfig = Field(default_factory=HrlConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)


class MetricsSchema(pa.DataFrameModel):
    epoch: Series[int] = pa.Field(ge=0, unique=True)
    env_steps: Series[int] = pa.Field(ge=0)
    mean_reward: Series[float] = pa.Field(nullable=True)
    critic_loss: Series[float] = pa.Field(nullable=True)
    actor_loss: Series[float] = pa.Field(nullable=True)
    alpha: Series[float] = pa.Field(gt=0)
    density_nll: Series[float] = pa.Field(nullable=True)

    class Config:
        strict = False
        coerce = True


class CurveSchema(pa.DataFrameModel):
    epoch: Series[int] = pa.Field(ge=0)
    mean_return: Series[float]

    class Config:
        strict = False
        coerce = True
