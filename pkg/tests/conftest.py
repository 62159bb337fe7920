"""Shared fixtures."""

import numpy as np
import pytest

from core.learner import AdaptiveQLearner, LearnerConfig
from core.metric import SpaceDescriptor
from core.partition import StepPartition
from environments import AmbulanceConfig, AmbulanceEnvironment, ArrivalDistribution, OilConfig, OilEnvironment
from harness import oracle as oracle_module
from harness.config import parse_config


@pytest.fixture
def space():
    return SpaceDescriptor(state_dims=1, action_dims=1)


@pytest.fixture
def fresh_tree(space):
    return StepPartition(step=1, space=space, initial_q=5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def oil_env():
    return OilEnvironment(OilConfig("laplace", lam=1.0, well_location=0.75))


@pytest.fixture
def ambulance_env():
    return AmbulanceEnvironment(AmbulanceConfig(cost_weight=0.25, arrivals=(ArrivalDistribution.beta(5, 2),)))


@pytest.fixture
def make_learner():
    def _make(H=5, K=200, **kwargs):
        return AdaptiveQLearner(LearnerConfig(H=H, K=K, **kwargs))
    return _make


@pytest.fixture
def trained_oil_learner(oil_env):
    learner = AdaptiveQLearner(LearnerConfig(H=3, K=300))
    run_rng = np.random.default_rng(7)
    for _ in range(300):
        learner.run_episode(oil_env, 0.0, run_rng)
    return learner


@pytest.fixture
def oil_config_data():
    return {
        "environment": {"kind": "oil", "survey": "laplace", "lambda": 1.0, "well_location": 0.75},
        "agent": "adaptive",
        "K": 40,
        "H": 3,
        "seed": 11,
    }


@pytest.fixture
def small_config(oil_config_data):
    return parse_config(oil_config_data)


@pytest.fixture(autouse=True)
def _small_oracle(monkeypatch):
    """Keep oracle grids small and caches isolated between tests."""
    monkeypatch.setenv("AQL_ORACLE_RESOLUTION", "101")
    monkeypatch.setenv("AQL_QUADRATURE_NODES", "64")
    monkeypatch.setenv("AQL_WORKERS", "1")
    oracle_module.clear_cache()
    yield
    oracle_module.clear_cache()
