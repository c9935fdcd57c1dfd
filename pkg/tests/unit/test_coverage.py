import numpy as np

from envs import FactorSpec
from envs.base import AGENT_TAG, BaseEnv
from evaluation import (
    bin_fraction,
    bins_from_positions,
    coverage_from_positions,
    rollout_positions,
    round_positions,
    unique_state_count,
)
from skills import SkillPrior


class StillEnv(BaseEnv):
    """An agent parked at (0.3, 0.3) whatever it does."""

    name = "still"
    observation_dim = 2
    action_dim = 2
    position_bounds = (-1.0, 1.0)

    @property
    def factor_spec(self):
        return FactorSpec.from_sizes(["agent"], [2], tags=[(AGENT_TAG,)])

    def _initial_state(self):
        return np.array([0.3, 0.3])

    def _transition(self, action):
        return self._state.copy(), {}

    def agent_positions(self, state):
        return {"agent": np.asarray(state)}


class ZeroAgent:
    def act(self, state, skill, stochastic=True, generator=None):
        return np.zeros(2)


def test_rounding_to_two_decimals():
    rounded = round_positions(np.array([0.27392337, -0.46042657]))

    assert rounded.tolist() == [0.27, -0.46]


def test_negative_zero_is_folded():
    assert unique_state_count(np.array([[-0.001, 0.0], [0.001, -0.0]])) == 1


def test_nearby_points_share_a_rounded_state():
    positions = np.array([[0.271, -0.461], [0.274, -0.459], [0.5, 0.5]])

    assert unique_state_count(positions) == 2


def test_count_ignores_visit_order():
    positions = np.random.default_rng(0).uniform(-1, 1, size=(300, 2))
    shuffled = positions[np.random.default_rng(1).permutation(300)]

    assert unique_state_count(positions) == unique_state_count(shuffled)
    assert bin_fraction(positions, (-1.0, 1.0)) == bin_fraction(shuffled, (-1.0, 1.0))


def test_row_sweep_covers_one_row_of_bins():
    centres = -1.0 + 0.04 * (np.arange(50) + 0.5)
    positions = np.stack([centres, np.full(50, 0.1)], axis=1)

    assert bin_fraction(positions, (-1.0, 1.0), bins=50) == 50 / 2500


def test_out_of_bounds_positions_land_in_edge_bins():
    assert bin_fraction(np.array([[5.0, 5.0], [0.999, 0.999]]), (-1.0, 1.0), bins=50) == 1 / 2500


def test_empty_positions_cover_nothing():
    assert unique_state_count(np.zeros((0, 2))) == 0
    assert bin_fraction(np.zeros((0, 2)), (-1.0, 1.0)) == 0.0


def test_frozen_agent_visits_a_single_state():
    env = StillEnv(episode_length=7)

    positions = rollout_positions(ZeroAgent(), env, SkillPrior(1, 2), steps=30, resample_every=4)

    assert positions["agent"].shape == (31, 2)
    assert coverage_from_positions(positions).min == 1
    assert bins_from_positions(positions, env.position_bounds).min == 1 / 2500


def test_reports_reduce_to_worst_and_mean_agent():
    positions = {
        "agent_0": np.array([[0.0, 0.0], [0.1, 0.1], [0.2, 0.2]]),
        "agent_1": np.array([[0.0, 0.0]]),
    }

    report = coverage_from_positions(positions, steps=3)

    assert report.counts == {"agent_0": 3, "agent_1": 1}
    assert report.min == 1
    assert report.mean == 2.0
    assert report.to_rows()[-2] == {"factor": "worst_agent", "unique_states": 1}


def test_multiparticle_rollout_tracks_every_agent(tiny_config):
    from training import build_bundle

    bundle = build_bundle(tiny_config())

    positions = rollout_positions(bundle.agent, bundle.env, bundle.prior, steps=25, resample_every=5)

    assert sorted(positions) == [f"agent_{i}" for i in range(bundle.env.n_agents)]
    assert all(p.shape == (26, 2) for p in positions.values())
