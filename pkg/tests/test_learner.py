"""Tests for the Adaptive Q-Learning agent and its schedules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.episode import StepOutcome
from core.errors import ContractViolation, InvalidInputError
from core.learner import (
    AdaptiveQLearner,
    LearnerConfig,
    alpha_weights,
    blend,
    bonus,
    learning_rate,
    lipschitz_from_primitives,
    v_estimate,
)
from environments.base import EnvStepResult


class ConstantRewardEnv:
    """One-dimensional test environment with a fixed reward and x' = a."""
    state_dims = 1
    action_dims = 1

    def __init__(self, reward=1.0):
        self.reward = reward

    def step(self, h, state, action, rng):
        return EnvStepResult(reward=self.reward, next_state=float(action[0]))


class TestLearningRate:

    @pytest.mark.parametrize("t,H,expected", [(1, 5, 1.0), (5, 5, 0.6), (95, 5, 0.06)])
    def test_examples(self, t, H, expected):
        assert learning_rate(t, H) == pytest.approx(expected)

    def test_t_zero(self):
        with pytest.raises(ContractViolation):
            learning_rate(0, 5)


class TestAlphaWeights:

    def test_single_visit(self):
        np.testing.assert_array_equal(alpha_weights(1, 4), [1.0])

    def test_small_cases(self):
        assert alpha_weights(3, 2).sum() == pytest.approx(1.0, abs=1e-12)
        assert alpha_weights(10, 3).max() <= 0.6

    @pytest.mark.parametrize("H", [1, 2, 5, 10])
    def test_identities_up_to_one_thousand(self, H):
        for t in range(1, 1001):
            w = alpha_weights(t, H)
            i = np.arange(1, t + 1)
            assert abs(w.sum() - 1.0) < 1e-12
            assert w.max() <= 2 * H / t + 1e-12
            assert (w ** 2).sum() <= 2 * H / t + 1e-12
            weighted = (w / np.sqrt(i)).sum()
            assert 1 / math.sqrt(t) - 1e-12 <= weighted <= 2 / math.sqrt(t) + 1e-12

    @pytest.mark.parametrize("H", [1, 2, 5])
    def test_partial_sums_bounded_by_one_plus_inverse_h(self, H):
        T = 2000
        columns = np.zeros(T)
        for t in range(1, T + 1):
            columns[:t] += alpha_weights(t, H)
        assert np.all(columns <= 1 + 1 / H + 1e-9)
        assert columns[0] > 1 + 1 / H - 0.05


class TestRecursiveUpdate:

    @given(
        targets=st.lists(st.floats(min_value=0.0, max_value=50.0), min_size=1, max_size=60),
        H=st.integers(min_value=1, max_value=10),
    )
    @settings(max_examples=1000, deadline=None)
    def test_matches_weighted_sum(self, targets, H):
        q = float(H)
        for t, target in enumerate(targets, start=1):
            q = blend(q, t, H, target)
        closed = float(np.dot(alpha_weights(len(targets), H), targets))
        assert abs(q - closed) < 1e-9

    def test_learner_update_matches_weighted_sum(self):
        cfg = LearnerConfig(H=1, K=100, bonus_scale_stochastic=0.5, bonus_scale_metric=0.5)
        learner = AdaptiveQLearner(cfg)
        tree = learner.trees[0]
        # exercise a depth-1 ball: the root splits after its first visit
        learner.update(1, StepOutcome(0, (0.5,), 0.3, (0.5,)))
        node = tree.select_ball((0.1,))
        rewards = [0.2, 0.9]
        for r in rewards:
            learner.update(1, StepOutcome(node.creation_index, node.region.action_midpoint(), r, (0.1,)))
        targets = [0.3 + bonus(1, cfg)] + [r + bonus(t, cfg) for t, r in zip((2, 3), rewards)]
        assert node.q_hat == pytest.approx(float(np.dot(alpha_weights(3, 1), targets)), abs=1e-9)


class TestBonus:

    def test_golden_value(self):
        cfg = LearnerConfig(H=5, K=2000, delta=0.05, lipschitz_L=1.0)
        expected = 2 * math.sqrt(125 * math.log(800000) / 4) + 2
        assert bonus(4, cfg) == pytest.approx(expected)
        assert bonus(4, cfg) == pytest.approx(43.22, abs=0.01)

    def test_zero_scales(self):
        cfg = LearnerConfig(H=5, K=2000, bonus_scale_stochastic=0.0, bonus_scale_metric=0.0)
        assert all(bonus(t, cfg) == 0.0 for t in (1, 7, 500))

    def test_strictly_decreasing(self):
        cfg = LearnerConfig(H=5, K=2000)
        values = [bonus(t, cfg) for t in range(1, 1001)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_pseudocode_constants(self):
        cfg = LearnerConfig(H=5, K=2000, bonus_form="pseudocode")
        expected = 4 * math.sqrt(125 * math.log(800000) / 4) + 1
        assert bonus(4, cfg) == pytest.approx(expected)


class TestValueEstimate:

    def test_terminal(self):
        assert v_estimate(None, (0.3,), 5) == 0.0

    def test_fresh_tree(self, fresh_tree):
        assert v_estimate(fresh_tree, (0.3,), 5) == 5.0

    def test_clipped_at_horizon(self, fresh_tree):
        a, b, _, _ = fresh_tree.split(fresh_tree.root)
        a.q_hat, b.q_hat = 2.5, 7.0
        assert v_estimate(fresh_tree, (0.1,), 5) == 5.0


class TestAct:

    def test_fresh_agent_plays_root_midpoint(self, make_learner):
        learner = make_learner()
        assert learner.act(1, (0.37,)) == (0, (0.5,))

    def test_after_root_split_plays_winning_quadrant(self, make_learner):
        learner = make_learner()
        tree = learner.trees[0]
        low, high, _, _ = tree.split(tree.root)
        high.q_hat = 6.0
        ball_id, action = learner.act(1, (0.1,))
        assert ball_id == high.creation_index
        assert action == (0.75,)

    def test_deterministic(self, trained_oil_learner):
        assert trained_oil_learner.act(2, (0.41,)) == trained_oil_learner.act(2, (0.41,))


class TestUpdate:

    def test_terminal_step_single_update(self, make_learner):
        learner = make_learner(H=5, K=2000)
        learner.update(5, StepOutcome(0, (0.5,), 1.0, (0.5,)))
        root = learner.trees[4].root
        assert root.q_hat == pytest.approx(1.0 + bonus(1, learner.config))
        assert root.visits == 1
        assert not root.is_leaf

    def test_zero_bonus_single_step(self):
        learner = AdaptiveQLearner(LearnerConfig(H=1, K=1, bonus_scale_stochastic=0, bonus_scale_metric=0))
        learner.update(1, StepOutcome(0, (0.5,), 0.42, (0.5,)))
        assert learner.trees[0].root.q_hat == pytest.approx(0.42)

    def test_uses_next_step_value(self, make_learner):
        learner = make_learner(H=2, K=10, bonus_scale_stochastic=0, bonus_scale_metric=0)
        learner.update(1, StepOutcome(0, (0.5,), 0.25, (0.5,)))
        assert learner.trees[0].root.q_hat == pytest.approx(0.25 + 2.0)

    def test_visits_increase_by_one(self, make_learner):
        learner = make_learner()
        tree = learner.trees[0]
        tree.split(tree.root)
        node = tree.select_ball((0.2,))
        before = node.visits
        learner.update(1, StepOutcome(node.creation_index, (0.25,), 0.5, (0.25,)))
        assert node.visits == before + 1

    def test_stale_ball_id(self, make_learner):
        learner = make_learner()
        learner.update(1, StepOutcome(0, (0.5,), 0.5, (0.5,)))
        with pytest.raises(ContractViolation):
            learner.update(1, StepOutcome(0, (0.5,), 0.5, (0.5,)))

    def test_split_event_returned(self, make_learner):
        learner = make_learner()
        event = learner.update(1, StepOutcome(0, (0.5,), 0.5, (0.5,)))
        assert event is not None
        assert (event.step, event.ball_id, event.depth, event.visits) == (1, 0, 0, 1)


class TestRunEpisode:

    def test_single_step_episode(self, rng):
        learner = AdaptiveQLearner(LearnerConfig(H=1, K=5))
        trace = learner.run_episode(ConstantRewardEnv(0.7), (0.2,), rng)
        assert len(trace) == 1
        assert trace.total_reward == pytest.approx(0.7)
        assert trace.actions == [(0.5,)]
        assert learner.episodes_completed == 1

    def test_rewards_in_unit_interval(self, make_learner, ambulance_env, rng):
        learner = make_learner(H=5, K=50)
        for _ in range(50):
            trace = learner.run_episode(ambulance_env, 0.5, rng)
            assert all(0.0 <= r <= 1.0 for r in trace.rewards)
            assert all(0.0 <= v <= 5.0 for v in trace.value_estimates)

    def test_roots_split_after_first_episode(self, make_learner, oil_env, rng):
        learner = make_learner(H=5, K=10)
        trace = learner.run_episode(oil_env, 0.0, rng)
        assert all(not tree.root.is_leaf for tree in learner.trees)
        assert len(trace.splits) == 5
        assert trace.partition_sizes == [4] * 5

    def test_refuses_to_run_past_k(self, rng):
        learner = AdaptiveQLearner(LearnerConfig(H=1, K=1))
        learner.run_episode(ConstantRewardEnv(), (0.5,), rng)
        with pytest.raises(ContractViolation):
            learner.run_episode(ConstantRewardEnv(), (0.5,), rng)

    def test_leaves_never_exceed_threshold(self, trained_oil_learner):
        for tree in trained_oil_learner.trees:
            for leaf in tree.leaves():
                assert leaf.visits < (1.0 / leaf.region.radius) ** 2


class TestPolicies:

    def test_frozen_policy_is_stable(self, make_learner, oil_env, rng):
        learner = make_learner(H=3, K=100)
        for _ in range(20):
            learner.run_episode(oil_env, 0.0, rng)
        policy = learner.extract_greedy_policy()
        first = [policy(h, (x,)) for h in (1, 2, 3) for x in (0.0, 0.3, 0.9)]
        for _ in range(80):
            learner.run_episode(oil_env, 0.0, rng)
        assert [policy(h, (x,)) for h in (1, 2, 3) for x in (0.0, 0.3, 0.9)] == first

    def test_pac_sampler_with_single_episode(self, rng):
        learner = AdaptiveQLearner(LearnerConfig(H=1, K=1), snapshots="all")
        learner.run_episode(ConstantRewardEnv(), (0.5,), rng)
        policy = learner.sample_pac_policy(rng)
        assert policy.episode == 1
        assert policy.leaf_counts() == [1]

    def test_pac_sampler_draws_recorded_snapshots(self, make_learner, oil_env, rng):
        learner = AdaptiveQLearner(LearnerConfig(H=2, K=30), snapshots=[1, 10, 20, 99])
        for _ in range(30):
            learner.run_episode(oil_env, 0.0, rng)
        assert sorted(learner.policy_log) == [1, 10, 20]
        draws = {learner.sample_pac_policy(rng).episode for _ in range(100)}
        assert draws <= {1, 10, 20}

    def test_missing_snapshot(self, make_learner):
        learner = make_learner()
        with pytest.raises(ContractViolation):
            learner.sample_pac_policy(np.random.default_rng(0))
        with pytest.raises(ContractViolation):
            learner.policy_at(3)


class TestLipschitzFromPrimitives:

    def test_total_variation(self):
        assert lipschitz_from_primitives("total-variation", 1, 1, 5) == 11

    def test_wasserstein(self):
        assert lipschitz_from_primitives("wasserstein", 1, 1, 5, h=1) == 5

    @pytest.mark.parametrize("h", [1, 3, 5])
    def test_wasserstein_collapses_without_transition_constant(self, h):
        assert lipschitz_from_primitives("wasserstein", 2.5, 0, 5, h=h) == 2.5

    def test_invalid_step(self):
        with pytest.raises(InvalidInputError):
            lipschitz_from_primitives("wasserstein", 1, 1, 5, h=6)


class TestConfig:

    @pytest.mark.parametrize("kwargs", [
        {"delta": 0.0},
        {"delta": 1.0},
        {"bonus_scale_metric": -1.0},
        {"lipschitz_L": -0.1},
        {"bonus_form": "other"},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises((InvalidInputError, ValueError)):
            LearnerConfig(H=5, K=10, **kwargs)
