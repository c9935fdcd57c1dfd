import numpy as np
import pytest

from envs import GunnerEnv, MultiParticleEnv, PointNavEnv, TaskEnvMismatchError, UnknownTaskError, make_task
from envs.gunner import TARGET_HITS
from envs.multiparticle import ACTIVATION, PAIR_OBS
from envs.tasks import TASK_REGISTRY, downstream_reward


def _activated(n_agents, *agents):
    blocks = np.zeros((n_agents, PAIR_OBS))
    for i in agents:
        blocks[i, ACTIVATION] = 1.0
    return blocks.reshape(-1)


def _reset(task, env, seed=0):
    state = env.reset(seed)
    task.reset(env, state, np.random.default_rng(seed))
    return state


def test_unknown_task_is_a_key_error():
    with pytest.raises(KeyError):
        make_task("kitchen-microwave")
    with pytest.raises(UnknownTaskError):
        make_task("kitchen-microwave")


def test_registry_lengths():
    assert make_task("seq-hard").length == 4
    assert make_task("fp-difficult").length == 10
    assert {"gunner-lim", "gunner-unlim", "pointnav-goal", "pointnav-multigoal"} <= set(TASK_REGISTRY)


def test_sequence_rewards_correct_order_and_penalises_others():
    env = MultiParticleEnv(n_agents=3)
    task = make_task("seq-easy")
    _reset(task, env)
    first, second = task.sequence
    wrong = ({0, 1, 2} - {first, second}).pop()
    idle = _activated(3)

    assert downstream_reward(task, _activated(3, wrong), None, idle) == -1.0
    assert downstream_reward(task, _activated(3, first), None, idle) == 1.0
    assert downstream_reward(task, _activated(3, second), None, idle) == 1.0
    assert task.progress == 2
    # sequence complete: any further interaction is wrong
    assert downstream_reward(task, _activated(3, first), None, idle) == -1.0


def test_held_interaction_is_scored_on_every_step():
    env = MultiParticleEnv(n_agents=3)
    task = make_task("seq-easy")
    _reset(task, env)
    first = task.sequence[0]
    held = _activated(3, first)

    assert downstream_reward(task, held, None, held) == 1.0
    assert downstream_reward(task, held, None, held) == -1.0
    assert downstream_reward(task, held, None, held) == -1.0
    assert task.progress == 1


def test_sequence_longer_than_agent_count_is_a_mismatch():
    env = MultiParticleEnv(n_agents=3)
    task = make_task("seq-hard")

    with pytest.raises(TaskEnvMismatchError):
        _reset(task, env)


def test_task_on_wrong_env_type_is_a_mismatch():
    with pytest.raises(TaskEnvMismatchError):
        _reset(make_task("gunner-unlim"), PointNavEnv())


def test_food_pays_once_and_poison_every_time():
    env = MultiParticleEnv(n_agents=3)
    task = make_task("fp-easy")
    _reset(task, env)
    task.food = np.array([True, False])
    idle = _activated(3)

    assert downstream_reward(task, _activated(3, 0), None, idle) == 1.0
    assert downstream_reward(task, _activated(3, 0), None, idle) == 0.0
    assert downstream_reward(task, _activated(3, 1), None, idle) == -1.0
    assert downstream_reward(task, _activated(3, 1), None, idle) == -1.0
    # station 2 lies past the indicator sequence
    assert downstream_reward(task, _activated(3, 2), None, idle) == 0.0


def test_instruction_vector_sizes():
    env = MultiParticleEnv(n_agents=10)
    seq, fp = make_task("seq-medium"), make_task("fp-medium")
    _reset(seq, env)
    _reset(fp, env)
    nav = make_task("pointnav-goal")
    _reset(nav, PointNavEnv())

    assert seq.instruction().shape == (5,)
    assert fp.instruction().shape == (10,)
    assert set(np.unique(fp.instruction()[:5])) <= {-1.0, 1.0}
    assert nav.instruction().shape == (2,)
    assert make_task("gunner-lim").instruction().shape == (0,)


def test_gunner_reward_counts_new_hits():
    task = make_task("gunner-unlim")
    prev, state = np.zeros(18), np.zeros(18)
    state[TARGET_HITS] = 1.0

    assert downstream_reward(task, state, np.zeros(6), prev) == 1.0
    assert downstream_reward(task, prev, np.zeros(6), prev) == 0.0


def test_gunner_task_overrides_ammo_mode():
    assert make_task("gunner-unlim").env_overrides == {"unlimited_ammo": True}
    lim = make_task("gunner-lim")
    env = GunnerEnv(**lim.env_overrides)
    assert env.config.unlimited_ammo is False and env.config.initial_ammo == 0


def test_pointnav_goal_reached_pays_and_resamples():
    env = PointNavEnv()
    task = make_task("pointnav-goal")
    state = _reset(task, env)
    old_goal = task.goal.copy()
    at_goal = task.goal_state(state)

    assert at_goal[0:2].tolist() == old_goal.tolist()
    assert downstream_reward(task, at_goal, np.zeros(2), state) == 10.0
    assert task.goals_reached == 1
    assert not np.array_equal(task.goal, old_goal)


def test_multigoal_window_and_timeout():
    env = PointNavEnv()
    task = make_task("pointnav-multigoal")
    state = _reset(task, env)
    far = state.copy()
    far[0:2] = np.clip(task.goal + 9.0, -10, 10) if np.all(task.goal < 0) else task.goal - 9.0

    assert np.all(np.abs(task.goal - state[0:2]) <= 7.5 + 1e-12)
    first = task.goal.copy()
    for _ in range(49):
        task.reward(far, np.zeros(2), far)
    assert np.array_equal(task.goal, first)
    task.reward(far, np.zeros(2), far)
    assert not np.array_equal(task.goal, first)


def test_multigoal_stops_after_four_goals():
    env = PointNavEnv()
    task = make_task("pointnav-multigoal")
    state = _reset(task, env)

    rewards = [downstream_reward(task, task.goal_state(state), np.zeros(2), state) for _ in range(4)]

    assert rewards == [2.5] * 4
    assert task.goals_reached == 4
    assert task.exhausted
    assert downstream_reward(task, task.goal_state(state), np.zeros(2), state) == 0.0


def test_expired_goals_count_towards_the_cap():
    env = PointNavEnv()
    task = make_task("pointnav-multigoal")
    state = _reset(task, env)
    far = state.copy()

    for _ in range(4 * 50):
        far[0:2] = task.goal + 20.0
        task.reward(far, np.zeros(2), far)

    assert task.goals_issued == 4
    assert task.goals_reached == 0
    assert task.exhausted
    assert downstream_reward(task, task.goal_state(state), np.zeros(2), state) == 0.0


def test_reward_free_task_is_zero():
    assert downstream_reward(make_task("reward-free"), np.ones(4), np.zeros(2), np.zeros(4)) == 0.0
