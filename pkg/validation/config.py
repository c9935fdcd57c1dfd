"""Config loading: YAML file → dotted overrides → pydantic validation.

Every failure surfaces as a ConfigError carrying the dotted path of the
offending field, which the CLI turns into exit code 2.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import yaml
from pydantic import ValidationError

from tensormath.errors import ConfigError

from .schemas import ExperimentConfig

logger = logging.getLogger(__name__)


def parse_override(item: str):
    """'section.field=value' → (['section', 'field'], YAML-typed value)."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form section.field=value", item)
    path, raw = item.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"override {item!r} has an empty field path", path)
    return keys, yaml.safe_load(raw)


def apply_overrides(data: Dict[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    for item in overrides:
        keys, value = parse_override(item)
        node = data
        for key in keys[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ConfigError(f"cannot descend into non-section {key!r}", ".".join(keys))
            node = child
        node[keys[-1]] = value
    return data


def _field_path(exc: ValidationError) -> str:
    first = exc.errors()[0]
    return ".".join(str(part) for part in first["loc"])


def resolve(config: ExperimentConfig) -> ExperimentConfig:
    """Apply cross-section rules: the weighting-and-factorization ablation
    always runs on a single embedding over the whole state."""
    if config.trainer.ablation == "susd-wf" and config.skills.factorization != "single":
        logger.info("ablation susd-wf: forcing skills.factorization=single")
        config = config.model_copy(deep=True)
        config.skills.factorization = "single"
    return config


def build_config(data: Optional[Dict[str, Any]] = None, overrides: Iterable[str] = ()) -> ExperimentConfig:
    data = apply_overrides(dict(data or {}), overrides)
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        path = _field_path(exc)
        raise ConfigError(f"invalid config at {path}: {exc.errors()[0]['msg']}", path) from exc
    return resolve(config)


def load_config(path: Optional[Union[str, Path]] = None, overrides: Iterable[str] = ()) -> ExperimentConfig:
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist", "config")
        with open(path) as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a mapping at top level", "config")
    return build_config(data, overrides)


def dump_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(config))
    return path


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()
