"""
Environment Contract
====================
Benchmark MDPs on S = A = [0,1]. Environments are stateless given their
configuration and the run's random generator.

Besides ``step`` each environment exposes the two expectations the
value-iteration oracle needs on a state/action grid:
    - expected_reward(h, grid, nodes)       -> (m, m) table of E[r_h(x_i, a_j)]
    - expected_next_value(h, grid, v, nodes) -> E[V_{h+1}(x')] broadcastable to (m, m)
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import InvalidInputError


@dataclass(frozen=True)
class EnvStepResult:
    """Outcome of one environment transition."""
    reward: float
    next_state: float
    arrival: Optional[float] = None


def midpoint_quantiles(n: int) -> np.ndarray:
    """Quadrature levels (i + 0.5) / n on the unit interval."""
    if n < 1:
        raise InvalidInputError(f"quadrature needs at least one node, got {n}")
    return (np.arange(n) + 0.5) / n


def clip_reward(value: float) -> float:
    return float(min(1.0, max(0.0, value)))


def scalar(value, name: str) -> float:
    """Single coordinate of a one-dimensional state or action."""
    if isinstance(value, (int, float, np.floating)):
        v = float(value)
    else:
        if len(value) != 1:
            raise InvalidInputError(f"{name} must be one-dimensional, got {len(value)} coordinates")
        v = float(value[0])
    if not 0.0 <= v <= 1.0:
        raise InvalidInputError(f"{name} {v} lies outside [0, 1]")
    return v


class Environment(ABC):
    """Episodic MDP on [0,1] x [0,1]."""

    name: str = "environment"
    state_dims: int = 1
    action_dims: int = 1
    default_initial_state: float = 0.0
    deterministic: bool = False

    @abstractmethod
    def step(self, h: int, state, action, rng: np.random.Generator) -> EnvStepResult:
        """Play action at state during step h."""

    @abstractmethod
    def expected_reward(self, h: int, grid: np.ndarray, nodes: int) -> np.ndarray:
        """(m, m) table of expected rewards, states on rows and actions on columns."""

    @abstractmethod
    def expected_next_value(self, h: int, grid: np.ndarray, v_next: np.ndarray, nodes: int) -> np.ndarray:
        """Expected next-step value, broadcastable against the (m, m) reward table."""

    def validate_horizon(self, H: int) -> None:
        """Reject horizons the configuration cannot serve."""

    def cache_key(self) -> tuple:
        """Hashable identity used to memoise oracle tables."""
        return (type(self).__name__, repr(self.config))
