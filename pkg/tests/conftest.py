import pytest

from validation.config import build_config

TINY_OVERRIDES = [
    "env.name=multiparticle-mini",
    "env.episode_length=10",
    "skills.hidden=16",
    "density.hidden=16",
    "density.grad_steps=2",
    "density.batch_size=16",
    "sac.hidden=16",
    "sac.batch_size=16",
    "sac.buffer_capacity=10000",
    "trainer.epochs=2",
    "trainer.episodes_per_epoch=2",
    "trainer.grad_steps=2",
    "trainer.checkpoint_every=0",
    "hrl.hidden=16",
    "hrl.batch_size=8",
    "hrl.grad_steps=2",
    "hrl.epochs=2",
    "hrl.seeds=2",
    "eval.coverage_steps=50",
    "eval.decode_steps=200",
    "eval.decode_epochs=2",
    "eval.zero_shot_budget=20",
]


@pytest.fixture(scope="session")
def tiny_config():
    """Factory for a seconds-scale ExperimentConfig; extra dotted overrides
    are applied on top."""

    def make(*overrides: str):
        return build_config({}, TINY_OVERRIDES + list(overrides))

    return make


@pytest.fixture()
def tiny_cli_args():
    """TINY_OVERRIDES as repeated `--set` arguments."""
    args = []
    for item in TINY_OVERRIDES:
        args += ["--set", item]
    return args
