"""
Ambulance Relocation
====================
An ambulance waits at x, relocates to a at cost |x - a|, then serves a call
arriving at x' ~ F_h:

    reward      r_h = 1 - (c |x - a| + (1 - c) |x' - a|)
    transition  x_{h+1} = x'

c = 1 rewards never moving; c = 0 only cares about the distance to the call.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from core.errors import InvalidInputError
from environments.base import EnvStepResult, Environment, clip_reward, midpoint_quantiles, scalar


class ArrivalKind(Enum):
    UNIFORM = "uniform"
    BETA = "beta"


@dataclass(frozen=True)
class ArrivalDistribution:
    """Law of the call location: uniform(lo, hi) or beta(a, b)."""
    kind: Union[ArrivalKind, str] = ArrivalKind.UNIFORM
    lo: float = 0.0
    hi: float = 1.0
    a: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ArrivalKind(self.kind))
        if self.kind is ArrivalKind.UNIFORM:
            if not 0.0 <= self.lo < self.hi <= 1.0:
                raise InvalidInputError(f"uniform arrivals need 0 <= lo < hi <= 1, got ({self.lo}, {self.hi})")
        elif self.a is None or self.b is None or self.a <= 0 or self.b <= 0:
            raise InvalidInputError(f"beta arrivals need a, b > 0, got ({self.a}, {self.b})")

    @classmethod
    def uniform(cls, lo: float = 0.0, hi: float = 1.0) -> "ArrivalDistribution":
        return cls(ArrivalKind.UNIFORM, lo=lo, hi=hi)

    @classmethod
    def beta(cls, a: float, b: float) -> "ArrivalDistribution":
        return cls(ArrivalKind.BETA, a=a, b=b)

    def frozen(self):
        """The matching scipy.stats distribution."""
        if self.kind is ArrivalKind.UNIFORM:
            return stats.uniform(loc=self.lo, scale=self.hi - self.lo)
        return stats.beta(self.a, self.b)

    def quadrature_nodes(self, n: int) -> np.ndarray:
        """Midpoint rule on the CDF: quantiles at (i + 0.5) / n."""
        return self.frozen().ppf(midpoint_quantiles(n))


def sample_arrival(spec: ArrivalDistribution, rng: np.random.Generator) -> float:
    if spec.kind is ArrivalKind.UNIFORM:
        return spec.lo + (spec.hi - spec.lo) * float(rng.random())
    return float(rng.beta(spec.a, spec.b))


@dataclass(frozen=True)
class AmbulanceConfig:
    """Cost weight c and one arrival law per step (a single law is reused at every step)."""
    cost_weight: float = 0.0
    arrivals: Tuple[ArrivalDistribution, ...] = (ArrivalDistribution(),)

    def __post_init__(self):
        object.__setattr__(self, "arrivals", tuple(self.arrivals))
        if not 0.0 <= self.cost_weight <= 1.0:
            raise InvalidInputError(f"cost weight must lie in [0, 1], got {self.cost_weight}")
        if not self.arrivals:
            raise InvalidInputError("at least one arrival distribution is required")

    def arrival_for(self, h: int) -> ArrivalDistribution:
        if len(self.arrivals) == 1:
            return self.arrivals[0]
        return self.arrivals[h - 1]


def shifting_uniform_preset() -> AmbulanceConfig:
    """Calls drift right over four steps, then concentrate around the middle (H = 5, c = 0)."""
    return AmbulanceConfig(
        cost_weight=0.0,
        arrivals=(
            ArrivalDistribution.uniform(0.0, 0.25),
            ArrivalDistribution.uniform(0.25, 0.5),
            ArrivalDistribution.uniform(0.5, 0.75),
            ArrivalDistribution.uniform(0.75, 1.0),
            ArrivalDistribution.uniform(0.45, 0.55),
        ),
    )


def ambulance_reward(cost_weight: float, x: float, a: float, arrival: float) -> float:
    return clip_reward(1.0 - (cost_weight * abs(x - a) + (1.0 - cost_weight) * abs(arrival - a)))


def ambulance_step(cfg: AmbulanceConfig, h: int, x: float, a: float, rng: np.random.Generator) -> EnvStepResult:
    arrival = sample_arrival(cfg.arrival_for(h), rng)
    return EnvStepResult(
        reward=ambulance_reward(cfg.cost_weight, x, a, arrival),
        next_state=arrival,
        arrival=arrival,
    )


class AmbulanceEnvironment(Environment):
    name = "ambulance"
    default_initial_state = 0.5

    def __init__(self, config: AmbulanceConfig):
        self.config = config

    def __repr__(self) -> str:
        return f"AmbulanceEnvironment(c={self.config.cost_weight}, arrivals={len(self.config.arrivals)})"

    def validate_horizon(self, H: int) -> None:
        if len(self.config.arrivals) not in (1, H):
            raise InvalidInputError(
                f"{len(self.config.arrivals)} arrival distributions cannot serve H={H}"
            )

    def step(self, h: int, state, action, rng: np.random.Generator) -> EnvStepResult:
        return ambulance_step(self.config, h, scalar(state, "state"), scalar(action, "action"), rng)

    def expected_reward(self, h: int, grid: np.ndarray, nodes: int) -> np.ndarray:
        c = self.config.cost_weight
        calls = self.config.arrival_for(h).quadrature_nodes(nodes)
        service = np.abs(calls[:, None] - grid[None, :]).mean(axis=0)
        move = np.abs(grid[:, None] - grid[None, :])
        return 1.0 - (c * move + (1.0 - c) * service[None, :])

    def expected_next_value(self, h: int, grid: np.ndarray, v_next: np.ndarray, nodes: int) -> np.ndarray:
        calls = self.config.arrival_for(h).quadrature_nodes(nodes)
        return np.asarray(np.interp(calls, grid, v_next).mean())

    def sample_arrival(self, h: int, rng: np.random.Generator) -> float:
        return sample_arrival(self.config.arrival_for(h), rng)
