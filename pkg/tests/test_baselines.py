"""Tests for the net-based learner and the ambulance heuristics."""

import numpy as np
import pytest
from scipy import stats

from core.baselines import (
    MedianAgent,
    NetConfig,
    NetQLearner,
    NoMovementAgent,
    default_epsilon,
    grid_count,
    heuristic_median,
    heuristic_no_movement,
)
from core.episode import StepOutcome
from core.errors import InvalidInputError
from core.learner import AdaptiveQLearner, LearnerConfig, bonus


class TestDefaultEpsilon:

    def test_evaluation_setting(self):
        eps = default_epsilon(2000, 5, 2)
        assert eps == pytest.approx(0.1)
        assert grid_count(eps) == 10

    def test_trivial(self):
        assert default_epsilon(1, 1, 2) == 1.0

    def test_tabular_limit(self):
        assert default_epsilon(50, 2, 0) == pytest.approx(100 ** -0.5)

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            default_epsilon(0, 5, 2)


class TestNetAct:

    def test_fresh_table_plays_smallest_action(self):
        agent = NetQLearner(NetConfig(H=2, K=10, epsilon=0.25))
        _, action = agent.act(1, (0.6,))
        assert action == (0.125,)

    def test_trained_cell_wins(self):
        agent = NetQLearner(NetConfig(H=2, K=10, epsilon=0.25))
        row = agent._state_row((0.6,))
        agent.q_hat[0, row, 2] = 10.0
        (r, c), action = agent.act(1, (0.6,))
        assert (r, c) == (row, 2)
        assert action == (0.625,)

    def test_snapping(self):
        agent = NetQLearner(NetConfig(H=1, K=1, epsilon=0.5))
        assert agent.snap_state((0.3,)) == (0.25,)
        assert agent.snap_state((0.5,)) == (0.25,)
        assert agent.snap_state((1.0,)) == (0.75,)
        assert agent.snap_state((0.0,)) == (0.25,)

    def test_table_size_is_constant(self, oil_env, rng):
        agent = NetQLearner(NetConfig(H=3, K=20, epsilon=0.1))
        assert agent.table_size == 100
        for _ in range(20):
            trace = agent.run_episode(oil_env, 0.0, rng)
            assert trace.partition_sizes == [100, 100, 100]


class TestNetUpdate:

    def test_zero_bonus_single_step(self):
        agent = NetQLearner(NetConfig(H=1, K=1, epsilon=0.5, bonus_scale_stochastic=0, bonus_scale_metric=0))
        handle, action = agent.act(1, (0.4,))
        agent.update(1, StepOutcome(handle, action, 0.66, action))
        assert agent.q_hat[0][handle] == pytest.approx(0.66)
        assert agent.visits[0][handle] == 1

    def test_visits_increment(self):
        agent = NetQLearner(NetConfig(H=2, K=5, epsilon=0.5))
        handle, action = agent.act(1, (0.4,))
        for n in range(1, 4):
            agent.update(1, StepOutcome(handle, action, 0.5, action))
            assert agent.visits[0][handle] == n

    def test_value_within_horizon(self, oil_env, rng):
        agent = NetQLearner(NetConfig(H=3, K=30, epsilon=0.25))
        for _ in range(30):
            trace = agent.run_episode(oil_env, 0.0, rng)
            assert all(0.0 <= v <= 3.0 for v in trace.value_estimates)
        assert np.all(np.diff(agent.visits.sum(axis=(1, 2))) == 0)

    def test_single_cell_bonus_equals_root_bonus(self):
        net = NetConfig(H=5, K=2000, epsilon=1.0)
        adaptive = LearnerConfig(H=5, K=2000)
        assert all(bonus(t, net) == bonus(t, adaptive) for t in range(1, 200))


class TestSingleCellEquivalence:
    """A one-cell net and a fresh adaptive root follow the same q_hat until the root splits."""

    @pytest.mark.parametrize("H", [1, 3])
    def test_identical_first_update(self, H):
        rewards = [0.35, 0.8, 0.1]
        net = NetQLearner(NetConfig(H=H, K=100, epsilon=1.0))
        adaptive = AdaptiveQLearner(LearnerConfig(H=H, K=100))

        assert net.q_hat[0, 0, 0] == adaptive.trees[0].root.q_hat
        handle, action = net.act(1, (0.5,))
        ball, a_action = adaptive.act(1, (0.5,))
        assert action == a_action == (0.5,)

        net.update(1, StepOutcome(handle, action, rewards[0], action))
        root = adaptive.trees[0].root
        adaptive.update(1, StepOutcome(ball, a_action, rewards[0], a_action))
        assert net.q_hat[0, 0, 0] == root.q_hat
        assert not root.is_leaf


class TestHeuristics:

    @pytest.mark.parametrize("x", [0.3, 0.0, 1.0])
    def test_no_movement(self, x):
        assert heuristic_no_movement(x) == (x,)
        assert heuristic_no_movement((x,)) == (x,)

    def test_median_examples(self):
        assert heuristic_median([0.2, 0.9, 0.4]) == 0.4
        assert heuristic_median([]) == 0.5
        assert heuristic_median([0.2, 0.4]) == pytest.approx(0.3)

    def test_median_of_beta_requests(self):
        draws = np.random.default_rng(3).beta(5, 2, size=10_000)
        # the exact Beta(5, 2) median is 0.7356
        assert heuristic_median(draws) == pytest.approx(stats.beta(5, 2).median(), abs=0.02)
        assert heuristic_median(draws) == pytest.approx(0.7, abs=0.05)

    def test_no_movement_agent_stays(self, ambulance_env, rng):
        agent = NoMovementAgent(H=5, K=3)
        trace = agent.run_episode(ambulance_env, 0.5, rng)
        assert all(a == s for a, s in zip(trace.actions, trace.states))

    def test_median_agent_tracks_requests(self, ambulance_env, rng):
        agent = MedianAgent(H=5, K=200)
        first = agent.run_episode(ambulance_env, 0.5, rng)
        assert first.actions[0] == (0.5,)
        for _ in range(199):
            agent.run_episode(ambulance_env, 0.5, rng)
        assert len(agent.arrivals) == 1000
        assert agent.act(1, (0.1,))[1][0] == pytest.approx(stats.beta(5, 2).median(), abs=0.04)
