import pytest

from envs import TaskEnvMismatchError, make_task
from envs.tasks import PointNavGoalTask
from evaluation import zero_shot_episode, zero_shot_eval
from tensormath.errors import UnsupportedModeError
from training import build_bundle


@pytest.fixture()
def pointnav_bundle(tiny_config):
    return build_bundle(tiny_config("env.name=pointnav"))


def test_one_entry_per_seed(pointnav_bundle):
    report = zero_shot_eval(pointnav_bundle, "pointnav-goal", budget=20, seeds=8)

    assert len(report.per_seed) == 8
    assert len(report.to_rows()) == 8
    assert report.budget == 20


def test_goal_within_reach_pays_every_step(pointnav_bundle):
    # radius covers the whole arena, so every step reaches the current goal
    task = PointNavGoalTask("everywhere", radius=100.0, success_reward=10.0)

    assert zero_shot_episode(pointnav_bundle, task, budget=3, seed=0) == 30.0


def test_workers_do_not_change_results(pointnav_bundle):
    serial = zero_shot_eval(pointnav_bundle, budget=15, seeds=3)
    parallel = zero_shot_eval(pointnav_bundle, budget=15, seeds=3, workers=3)

    assert serial.per_seed == parallel.per_seed


def test_discrete_skills_are_rejected(tiny_config):
    bundle = build_bundle(tiny_config("env.name=pointnav", "skills.mode=discrete"))

    with pytest.raises(UnsupportedModeError):
        zero_shot_eval(bundle, budget=5, seeds=1)


def test_task_without_goals_is_rejected(pointnav_bundle):
    with pytest.raises(UnsupportedModeError):
        zero_shot_episode(pointnav_bundle, make_task("reward-free"), budget=5, seed=0)


def test_goal_task_on_other_env_is_rejected(tiny_config):
    bundle = build_bundle(tiny_config())

    with pytest.raises(TaskEnvMismatchError):
        zero_shot_eval(bundle, "pointnav-goal", budget=5, seeds=1)
