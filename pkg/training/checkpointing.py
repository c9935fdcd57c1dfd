"""Component bundles: everything a pretrained run produces, saved and
restored as one checkpoint directory.

Layout of a bundle directory:

    manifest.json, arrays.bin   tensormath array checkpoint (bank., density., agent. prefixes)
    config.yaml                 resolved ExperimentConfig
    bundle.json                 epoch, env name and the FactorSpec in use
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import torch

from agents.sac_agent import SacAgent
from density.gaussian import GaussianCondModel
from envs import BaseEnv, FactorSpec, make_env, resolve_factorization
from skills import EmbeddingBank, SkillPrior
from tensormath import child_seed, load_arrays, load_module_arrays, module_arrays, save_arrays, seed_everything
from validation.config import load_config, save_config
from validation.schemas import ExperimentConfig

logger = logging.getLogger(__name__)

CONFIG_NAME = "config.yaml"
BUNDLE_META = "bundle.json"


@dataclass
class Bundle:
    config: ExperimentConfig
    env: BaseEnv
    spec: FactorSpec
    prior: SkillPrior
    bank: EmbeddingBank
    density: GaussianCondModel
    agent: SacAgent
    epoch: int = 0


def torch_dtype(config: ExperimentConfig) -> torch.dtype:
    return torch.float64 if config.trainer.dtype == "float64" else torch.float32


def env_from_config(config: ExperimentConfig, **extra: Any) -> BaseEnv:
    return make_env(
        config.env.name,
        episode_length=config.env.episode_length,
        n_agents=config.env.n_agents,
        **extra,
    )


def build_bundle(
    config: ExperimentConfig, env: Optional[BaseEnv] = None, spec: Optional[FactorSpec] = None
) -> Bundle:
    """Freshly initialised components for `config`; parameter init is seeded
    from trainer.seed."""
    seed = config.trainer.seed
    seed_everything(seed)
    dtype = torch_dtype(config)
    env = env or env_from_config(config)
    spec = spec or resolve_factorization(env, config.skills.factorization, seed)
    prior = SkillPrior(spec.n_factors, config.skills.dim, config.skills.mode)

    bank = EmbeddingBank(
        spec,
        config.skills.dim,
        hidden=config.skills.hidden,
        hidden_layers=config.skills.hidden_layers,
        initial_lambda=config.skills.initial_lambda,
        epsilon=config.skills.epsilon,
        dtype=dtype,
    )
    density = GaussianCondModel(
        env.observation_dim,
        hidden=config.density.hidden,
        hidden_layers=config.density.hidden_layers,
        logvar_min=config.density.logvar_min,
        logvar_max=config.density.logvar_max,
        dtype=dtype,
    )
    agent = SacAgent(
        env.observation_dim,
        prior.skill_dim,
        env.action_dim,
        hidden=config.sac.hidden,
        hidden_layers=config.sac.hidden_layers,
        learning_rate=config.sac.learning_rate,
        gamma=config.sac.gamma,
        tau=config.sac.tau,
        init_alpha=config.sac.init_alpha,
        target_entropy=config.sac.target_entropy,
        dtype=dtype,
        seed=child_seed(seed, 1),
        name="skill-policy",
    )
    return Bundle(config, env, spec, prior, bank, density, agent)


def save_bundle(bundle: Bundle, directory: Path) -> Path:
    directory = Path(directory)
    arrays = {}
    arrays.update(module_arrays(bundle.bank, prefix="bank."))
    arrays.update(module_arrays(bundle.density, prefix="density."))
    arrays.update({f"agent.{k}": v for k, v in bundle.agent.state_arrays().items()})
    save_arrays(directory, arrays)
    save_config(bundle.config, directory / CONFIG_NAME)
    meta = {"epoch": bundle.epoch, "env": bundle.config.env.name, "factor_spec": bundle.spec.to_dict()}
    (directory / BUNDLE_META).write_text(json.dumps(meta, indent=2))
    logger.info("Saved bundle (epoch %d) to %s", bundle.epoch, directory)
    return directory


def load_bundle(directory: Path, env: Optional[BaseEnv] = None) -> Bundle:
    directory = Path(directory)
    if not (directory / BUNDLE_META).exists():
        raise FileNotFoundError(f"No checkpoint bundle at {directory}")
    config = load_config(directory / CONFIG_NAME)
    meta = json.loads((directory / BUNDLE_META).read_text())
    bundle = build_bundle(config, env=env, spec=FactorSpec.from_dict(meta["factor_spec"]))
    bundle.epoch = int(meta["epoch"])

    arrays = load_arrays(directory)
    load_module_arrays(bundle.bank, arrays, prefix="bank.")
    load_module_arrays(bundle.density, arrays, prefix="density.")
    bundle.agent.load_state_arrays({k[len("agent."):]: v for k, v in arrays.items() if k.startswith("agent.")})
    return bundle
