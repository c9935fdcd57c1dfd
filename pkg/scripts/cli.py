"""Command-line entry point for pretraining, downstream training and evaluation.
Usage:
    python -m scripts.cli pretrain [--config configs/base.yaml] [--env NAME] [--epochs N]
                                   [--seed S] [--ablation full|susd-w|susd-wf] [--factors NAME]
                                   [--set section.field=value ...]
    python -m scripts.cli downstream --checkpoint DIR --task NAME [--seeds N] [--epochs N]
    python -m scripts.cli eval --checkpoint DIR --kind coverage|bins|decode|zeroshot
    python -m scripts.cli dump-trajectories --checkpoint DIR [--episodes K]

Every command writes into a fresh run directory under $SUSD_OUTPUT_ROOT
(default `runs`) holding the resolved config, a run manifest and an
events.jsonl log. Exit codes: 0 ok, 2 invalid config / task / checkpoint,
3 training divergence.
"""

import argparse
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv

from envs import TaskEnvMismatchError, UnknownEnvError, UnknownTaskError, make_task
from envs.trajectory import TrajectoryRecord, write_trajectories
from evaluation import (
    bin_coverage,
    factor_decode,
    publish,
    state_coverage,
    zero_shot_eval,
)
from hrl import run_downstream
from monitoring import RunLogger, RunManifest
from skills import sample_skill
from tensormath import child_seed, torch_generator
from tensormath.errors import ConfigError, TrainingDivergenceError, UnsupportedModeError
from training import SusdTrainer, collect_episode, load_bundle
from validation.config import build_config, config_hash, load_config, save_config
from validation.quality_checks import TransitionChecker
from validation.schemas import ExperimentConfig

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EVAL_KINDS = ("coverage", "bins", "decode", "zeroshot")


def output_root() -> Path:
    return Path(os.getenv("SUSD_OUTPUT_ROOT", "runs"))


def new_run_dir(command: str, config: ExperimentConfig) -> Path:
    """A directory that did not exist before; reruns never overwrite."""
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    base = output_root() / f"{command}-{stamp}-{config_hash(config)[:8]}"
    run_dir, n = base, 0
    while True:
        try:
            run_dir.mkdir(parents=True, exist_ok=False)
            return run_dir
        except FileExistsError:
            n += 1
            run_dir = base.with_name(f"{base.name}-{n}")


def start_run(command: str, config: ExperimentConfig, n_factors: Optional[int] = None):
    run_dir = new_run_dir(command, config)
    save_config(config, run_dir / "config.yaml")
    manifest = RunManifest(
        command=command, config_hash=config_hash(config), seed=config.trainer.seed, n_factors=n_factors
    )
    manifest.add_artifact("config", run_dir / "config.yaml")
    run_logger = RunLogger(run_dir)
    run_logger.run_started(command, manifest.config_hash, manifest.seed)
    logger.info("Run directory: %s", run_dir)
    return run_dir, manifest, run_logger


def pretrain_overrides(args) -> List[str]:
    shorthands = [
        ("env.name", args.env),
        ("trainer.epochs", args.epochs),
        ("trainer.seed", args.seed),
        ("trainer.ablation", args.ablation),
        ("skills.factorization", args.factors),
    ]
    return list(args.overrides) + [f"{key}={value}" for key, value in shorthands if value is not None]


def cmd_pretrain(args) -> Path:
    config = load_config(args.config, pretrain_overrides(args))
    trainer = SusdTrainer(config)
    run_dir, manifest, run_logger = start_run("pretrain", trainer.config, n_factors=trainer.spec.n_factors)
    try:
        trainer.run(run_dir, run_logger=run_logger)
    finally:
        manifest.add_artifact("metrics", run_dir / "metrics.csv")
        manifest.add_artifact("checkpoint", run_dir / "checkpoints" / "final")
        manifest.add_artifact("events", run_logger.path)
        manifest.write(run_dir)
        run_logger.close()
    return run_dir


def _checkpoint_config(bundle, overrides: List[str]) -> ExperimentConfig:
    return build_config(bundle.config.model_dump(mode="json"), overrides)


def cmd_downstream(args) -> Path:
    bundle = load_bundle(args.checkpoint)
    overrides = [f"hrl.task={args.task}"] + list(args.overrides)
    if args.seeds is not None:
        overrides.append(f"hrl.seeds={args.seeds}")
    config = _checkpoint_config(bundle, overrides)
    make_task(config.hrl.task).check_env(bundle.env)
    run_dir, manifest, run_logger = start_run("downstream", config, n_factors=bundle.spec.n_factors)
    try:
        paths = run_downstream(bundle, config.hrl.task, config.hrl, run_dir, epochs=args.epochs, run_logger=run_logger)
        for name, path in paths.items():
            manifest.add_artifact(f"curve_{name}", path)
    finally:
        manifest.write(run_dir)
        run_logger.close()
    return run_dir


def cmd_eval(args) -> Path:
    bundle = load_bundle(args.checkpoint)
    config = _checkpoint_config(bundle, list(args.overrides))
    ev = config.eval
    if args.kind == "zeroshot":
        report = zero_shot_eval(bundle, args.task or "pointnav-goal", ev.zero_shot_budget, ev.zero_shot_seeds)
        rows = report.to_rows()
        summary = {"task": report.task, "budget": report.budget, "mean": report.mean, "std": report.std}
    elif args.kind == "coverage":
        report = state_coverage(bundle.agent, bundle.env, bundle.prior, ev.coverage_steps, ev.resample_every, ev.seed)
        rows = report.to_rows()
        summary = {"worst_agent": report.min, "mean_agent": report.mean, "steps": report.steps}
    elif args.kind == "bins":
        report = bin_coverage(
            bundle.agent, bundle.env, bundle.prior, ev.bins_per_axis, ev.coverage_steps, ev.resample_every, ev.seed
        )
        rows = report.to_rows()
        summary = {"worst_agent": report.min, "mean_agent": report.mean, "bins_per_axis": report.bins_per_axis}
    else:
        steps = ev.decode_desk_steps if ev.decode_desk_scale else ev.decode_steps
        report = factor_decode(
            bundle,
            steps=steps,
            hidden_candidates=ev.hidden_candidates,
            resample_every=ev.resample_every,
            epochs=ev.decode_epochs,
            batch_size=ev.decode_batch_size,
            learning_rate=ev.decode_learning_rate,
            seed=ev.seed,
        )
        rows = report.to_rows()
        summary = {"hidden_size": report.hidden_size, "mean_mse": report.mean_mse, "factor_mse": report.factor_mse}

    run_dir, manifest, run_logger = start_run(f"eval-{args.kind}", config, n_factors=bundle.spec.n_factors)
    try:
        for name, path in publish(args.kind, rows, summary, run_dir).items():
            manifest.add_artifact(f"{args.kind}_{name}", path)
        run_logger.eval_completed(args.kind, summary)
    finally:
        manifest.write(run_dir)
        run_logger.close()
    return run_dir


def cmd_dump_trajectories(args) -> Path:
    bundle = load_bundle(args.checkpoint)
    config = _checkpoint_config(bundle, list(args.overrides))
    checker = TransitionChecker(bundle.env.observation_dim, bundle.env.action_dim, bundle.prior.skill_dim)
    seed = config.eval.seed

    records = []
    rejected = {}
    for episode in range(args.episodes):
        skill = sample_skill(bundle.prior, np.random.default_rng(child_seed(seed, episode, 1)))
        transitions = collect_episode(
            bundle.env,
            bundle.agent,
            skill,
            seed=child_seed(seed, episode, 0),
            generator=torch_generator(child_seed(seed, episode, 2)),
        )
        ok, issues = checker.validate_episode(transitions)
        if not ok:
            rejected[episode] = issues
            continue
        records.extend(
            TrajectoryRecord(
                episode=episode,
                t=t,
                z=tr.skill.tolist(),
                s=tr.state.tolist(),
                a=tr.action.tolist(),
                s_next=tr.next_state.tolist(),
            )
            for t, tr in enumerate(transitions)
        )

    run_dir, manifest, run_logger = start_run("dump-trajectories", config, n_factors=bundle.spec.n_factors)
    path = run_dir / "trajectories.jsonl"
    count = write_trajectories(path, records)
    manifest.add_artifact("trajectories", path)
    manifest.write(run_dir)
    for episode, issues in rejected.items():
        logger.warning("episode %d skipped: %s", episode, "; ".join(issues))
        run_logger.log_event("episode_rejected", episode=episode, issues=issues)
    run_logger.log_event("trajectories_written", path=str(path), records=count)
    run_logger.close()
    return run_dir


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="susd", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def with_overrides(p):
        p.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="SECTION.FIELD=VALUE",
            help="Override a config field (repeatable)",
        )
        return p

    pre = with_overrides(sub.add_parser("pretrain", help="Run skill pretraining"))
    pre.add_argument("--config", type=Path, default=None)
    pre.add_argument("--env", default=None)
    pre.add_argument("--epochs", type=int, default=None)
    pre.add_argument("--seed", type=int, default=None)
    pre.add_argument("--ablation", choices=["full", "susd-w", "susd-wf"], default=None)
    pre.add_argument("--factors", default=None, help="Named factorization, e.g. gunner-over4")
    pre.set_defaults(func=cmd_pretrain)

    down = with_overrides(sub.add_parser("downstream", help="Train a high-level policy on a task"))
    down.add_argument("--checkpoint", type=Path, required=True)
    down.add_argument("--task", required=True)
    down.add_argument("--seeds", type=int, default=None)
    down.add_argument("--epochs", type=int, default=None)
    down.set_defaults(func=cmd_downstream)

    ev = with_overrides(sub.add_parser("eval", help="Evaluate a checkpoint"))
    ev.add_argument("--checkpoint", type=Path, required=True)
    ev.add_argument("--kind", choices=EVAL_KINDS, required=True)
    ev.add_argument("--task", default=None, help="Goal task for zeroshot (default pointnav-goal)")
    ev.set_defaults(func=cmd_eval)

    dump = with_overrides(sub.add_parser("dump-trajectories", help="Write skill-policy rollouts as JSON lines"))
    dump.add_argument("--checkpoint", type=Path, required=True)
    dump.add_argument("--episodes", type=int, default=1)
    dump.set_defaults(func=cmd_dump_trajectories)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO)
    args = build_parser().parse_args(argv)
    try:
        run_dir = args.func(args)
    except ConfigError as e:
        logger.error("Invalid config (%s): %s", e.field_path, e)
        return EXIT_CONFIG
    except (UnknownEnvError, UnknownTaskError, TaskEnvMismatchError, UnsupportedModeError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        logger.error("Missing checkpoint: %s", e)
        return EXIT_CONFIG
    except TrainingDivergenceError as e:
        logger.error("Training diverged: %s", e)
        return EXIT_DIVERGENCE
    print(run_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
