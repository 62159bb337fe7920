"""Tests for the value-iteration oracle."""

import numpy as np
import pytest

from core.errors import InvalidInputError
from core.learner import lipschitz_from_primitives
from environments import (
    AmbulanceConfig,
    AmbulanceEnvironment,
    ArrivalDistribution,
    OilConfig,
    OilEnvironment,
    shifting_uniform_preset,
)
from harness.diagnostics import policy_value
from harness.oracle import OracleGrid, compute_oracle, state_grid


class TestGrid:

    @pytest.mark.parametrize("m", [101, 201, 401])
    def test_well_location_on_grid(self, m):
        assert 0.75 in state_grid(m)

    def test_resolution_must_be_at_least_two(self, oil_env):
        with pytest.raises(InvalidInputError):
            compute_oracle(oil_env, 1, m=1)


class TestOilOracle:

    def test_single_step_value_at_well(self, oil_env):
        oracle = compute_oracle(oil_env, H=1, m=101)
        assert oracle.value(1, 0.75) == 1.0

    def test_terminal_values_are_zero(self, oil_env):
        oracle = compute_oracle(oil_env, H=4, m=51)
        assert np.all(oracle.V[4] == 0.0)

    def test_value_is_max_of_q(self, oil_env):
        oracle = compute_oracle(oil_env, H=3, m=51)
        np.testing.assert_array_equal(oracle.V[:3], oracle.Q.max(axis=2))

    def test_lipschitz_spot_check(self, oil_env):
        oracle = compute_oracle(oil_env, H=3, m=101)
        bound = lipschitz_from_primitives("wasserstein", 2.0, 1.0, 3, h=1)
        for h in range(1, 4):
            slopes = np.abs(np.diff(oracle.V[h - 1])) / np.diff(oracle.grid)
            assert slopes.max() <= bound + 1e-9

    def test_greedy_action_heads_to_well(self, oil_env):
        oracle = compute_oracle(oil_env, H=5, m=101)
        assert oracle.greedy_action(1, 0.0) == 0.75
        assert oracle.greedy_action(5, 0.75) == 0.75

    def test_oracle_policy_has_near_zero_regret(self, oil_env, rng):
        oracle = compute_oracle(oil_env, H=5, m=101)
        value = policy_value(lambda h, x: (oracle.greedy_action(h, x),), oil_env, 0.0, 5, 3, rng)
        assert value == pytest.approx(oracle.value(1, 0.0), abs=1e-9)

    def test_cache_returns_same_object(self, oil_env):
        assert compute_oracle(oil_env, 2, 51) is compute_oracle(OilEnvironment(OilConfig()), 2, 51)

    def test_noisy_rewards_are_averaged(self):
        env = OilEnvironment(OilConfig("laplace", 1.0, 0.75, noise_sigma=0.2))
        oracle = compute_oracle(env, H=1, m=101, quadrature_nodes=64)
        assert 0.0 < oracle.value(1, 0.75) < 1.0


class TestAmbulanceOracle:

    def test_no_movement_is_optimal_at_full_cost_weight(self):
        env = AmbulanceEnvironment(AmbulanceConfig(1.0, (ArrivalDistribution.beta(5, 2),)))
        oracle = compute_oracle(env, H=1, m=101, quadrature_nodes=64)
        np.testing.assert_allclose(oracle.V[0], 1.0)

    def test_shifting_uniform_values_bounded(self):
        env = AmbulanceEnvironment(shifting_uniform_preset())
        oracle = compute_oracle(env, H=5, m=101, quadrature_nodes=64)
        assert np.all(oracle.V[0] <= 5.0)
        assert np.all(oracle.V[0] >= 0.0)
        # c = 0: the last step only pays the distance to a call in [0.45, 0.55]
        assert oracle.value(5, 0.2) == pytest.approx(1 - 0.025, abs=1e-3)


def test_save_and_load(tmp_path, oil_env):
    oracle = compute_oracle(oil_env, H=2, m=21)
    path = oracle.save(tmp_path / "oracle")
    assert path.suffix == ".npz"
    loaded = OracleGrid.load(path)
    assert loaded.resolution == 21
    np.testing.assert_array_equal(loaded.Q, oracle.Q)
    np.testing.assert_array_equal(loaded.V, oracle.V)
