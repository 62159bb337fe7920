"""
Oil Discovery
=============
An agent surveys a 1-D map for the most profitable drilling location.

    survey function  f(a) = exp(-lambda |a - c|)      (laplace)
                     f(a) = 1 - lambda (a - c)^2      (quadratic)
    reward           r_h(x, a) = clip[0,1]( max(0, f(a) + noise - |x - a|) )
    transition       x' = a

Noise is N(0, sigma^2) truncated to [-1, 1], and zero when sigma = 0.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy import stats

from core.errors import InvalidInputError
from environments.base import EnvStepResult, Environment, clip_reward, midpoint_quantiles, scalar


class SurveyKind(Enum):
    LAPLACE = "laplace"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class OilConfig:
    survey_kind: Union[SurveyKind, str] = SurveyKind.LAPLACE
    lam: float = 1.0
    well_location: float = 0.75
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "survey_kind", SurveyKind(self.survey_kind))
        if self.lam < 0:
            raise InvalidInputError(f"lambda must be >= 0, got {self.lam}")
        if not 0.0 <= self.well_location <= 1.0:
            raise InvalidInputError(f"well location must lie in [0, 1], got {self.well_location}")
        if self.noise_sigma < 0:
            raise InvalidInputError(f"noise sigma must be >= 0, got {self.noise_sigma}")


def survey_value(cfg: OilConfig, a):
    """f(a); works elementwise on arrays."""
    gap = np.asarray(a, dtype=float) - cfg.well_location
    if cfg.survey_kind is SurveyKind.LAPLACE:
        return np.exp(-cfg.lam * np.abs(gap))
    return 1.0 - cfg.lam * gap ** 2


def _noise_law(sigma: float):
    return stats.truncnorm(-1.0 / sigma, 1.0 / sigma, loc=0.0, scale=sigma)


def oil_step(cfg: OilConfig, h: int, x: float, a: float, rng: np.random.Generator) -> EnvStepResult:
    noise = 0.0
    if cfg.noise_sigma > 0:
        noise = float(_noise_law(cfg.noise_sigma).rvs(random_state=rng))
    reward = clip_reward(max(0.0, float(survey_value(cfg, a)) + noise - abs(x - a)))
    return EnvStepResult(reward=reward, next_state=float(a))


class OilEnvironment(Environment):
    name = "oil"
    default_initial_state = 0.0

    def __init__(self, config: OilConfig):
        self.config = config
        self.deterministic = config.noise_sigma == 0

    def __repr__(self) -> str:
        return f"OilEnvironment({self.config})"

    def step(self, h: int, state, action, rng: np.random.Generator) -> EnvStepResult:
        return oil_step(self.config, h, scalar(state, "state"), scalar(action, "action"), rng)

    def expected_reward(self, h: int, grid: np.ndarray, nodes: int) -> np.ndarray:
        base = survey_value(self.config, grid)[None, :] - np.abs(grid[:, None] - grid[None, :])
        if self.deterministic:
            return np.clip(base, 0.0, 1.0)
        noise = _noise_law(self.config.noise_sigma).ppf(midpoint_quantiles(nodes))
        total = np.zeros_like(base)
        for eps in noise:
            total += np.clip(base + eps, 0.0, 1.0)
        return total / len(noise)

    def expected_next_value(self, h: int, grid: np.ndarray, v_next: np.ndarray, nodes: int) -> np.ndarray:
        # x' = a and the action grid equals the state grid
        return v_next[None, :]
