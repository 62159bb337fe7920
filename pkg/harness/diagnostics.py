"""
Regret and Bound Diagnostics
============================
    - per_episode_regret: V*_1(x_1^k) minus the realized episode reward (an
      unbiased surrogate for the definitional regret term) and its running sum
    - averaged_regret: same gap against the Monte-Carlo value of frozen policies
    - bound_diagnostic / regret_bound: numeric regret bounds from the covering profile
    - fit_exponent: log-log least-squares slope used for growth-rate checks
    - optimism_violations: how often V_hat fell below V* along visited states
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from core.errors import InvalidInputError
from core.metric import as_vector
from harness.oracle import OracleGrid


@dataclass
class RegretTrace:
    per_episode: np.ndarray
    cumulative: np.ndarray

    @property
    def total(self) -> float:
        return float(self.cumulative[-1]) if len(self.cumulative) else 0.0


def per_episode_regret(rewards: Sequence[float], oracle: OracleGrid, initial_states: Sequence[float]) -> RegretTrace:
    """V*_1(x_1^k) - total reward of episode k, plus the cumulative sum."""
    rewards = np.asarray(rewards, dtype=float)
    if len(rewards) == 0:
        return RegretTrace(per_episode=np.zeros(0), cumulative=np.zeros(0))
    starts = np.asarray(initial_states, dtype=float).reshape(len(rewards), -1)[:, 0]
    per = oracle.values(1, starts) - rewards
    return RegretTrace(per_episode=per, cumulative=np.cumsum(per))


def policy_value(policy, env, x1, H: int, rollouts: int, rng: np.random.Generator) -> float:
    """Monte-Carlo estimate of V_1^pi(x1) for a frozen policy (callable (h, x) -> action)."""
    if rollouts < 1:
        raise InvalidInputError(f"rollouts must be >= 1, got {rollouts}")
    total = 0.0
    for _ in range(rollouts):
        x = as_vector(x1, env.state_dims, "initial state")
        for h in range(1, H + 1):
            result = env.step(h, x, policy(h, x), rng)
            total += result.reward
            x = as_vector(result.next_state, env.state_dims, "next state")
    return total / rollouts


def averaged_regret(policies: Dict[int, object], env, oracle: OracleGrid, x1, H: int,
                    rollouts: int, rng: np.random.Generator) -> Dict[int, float]:
    """V*_1(x1) - policy_value for each recorded snapshot, keyed by episode."""
    v_star = oracle.value(1, x1)
    return {k: v_star - policy_value(pi, env, x1, H, rollouts, rng) for k, pi in sorted(policies.items())}


def optimism_violations(value_estimates: np.ndarray, step_states: np.ndarray, oracle: OracleGrid,
                        tolerance: float = 1e-6) -> float:
    """Fraction of (k, h) with V_hat_h^k(x_h^k) < V*_h(x_h^k) - tolerance."""
    estimates = np.asarray(value_estimates, dtype=float)
    states = np.asarray(step_states, dtype=float)
    K, H = estimates.shape
    v_star = np.column_stack([oracle.values(h, states[:, h - 1]) for h in range(1, H + 1)])
    mask = ~np.isnan(estimates)
    if not mask.any():
        return 0.0
    return float(np.mean((estimates < v_star - tolerance)[mask]))


# =============================================================================
# Bounds
# =============================================================================

def _log_term(K: int, H: int, delta: float) -> float:
    if K < 1 or H < 1 or not 0 < delta < 1:
        raise InvalidInputError(f"need K, H >= 1 and delta in (0, 1), got K={K}, H={H}, delta={delta}")
    return math.log(4 * H * K / delta)


def bound_diagnostic(
    K: int,
    H: int,
    delta: float,
    L: float,
    d_max: float = 1.0,
    covering: Optional[Callable[[float], float]] = None,
    d_c: float = 2.0,
    c: float = 1.0,
) -> float:
    """
    Refined regret bound from a covering profile N_r (default c * r^-d_c):

        3H^2 + 6 sqrt(2 H^3 K ln(4HK/delta))
          + 96 H (sqrt(H^3 ln(4HK/delta)) + L d_max)
            * inf_{r0} ( K r0 / d_max + sum_{r = d_max 2^-i >= r0} N_r d_max / r )

    with r0 ranging over the dyadic scales d_max 2^-i, i = 0..ceil(log2 K) + 2.
    """
    log_term = _log_term(K, H, delta)
    if covering is None:
        covering = lambda r: c * r ** (-d_c)
    depth = math.ceil(math.log2(max(K, 2))) + 2
    scales = d_max * 2.0 ** -np.arange(depth + 1)
    partial = np.cumsum([covering(r) * d_max / r for r in scales])
    zoom = float(np.min(K * scales / d_max + partial))
    return (3 * H ** 2
            + 6 * math.sqrt(2 * H ** 3 * K * log_term)
            + 96 * H * (math.sqrt(H ** 3 * log_term) + L * d_max) * zoom)


def regret_bound(K: int, H: int, delta: float, L: float, d_max: float = 1.0,
                 d_c: float = 2.0, c: float = 1.0) -> float:
    """Worst-case bound with the K^((d_c+1)/(d_c+2)) leading term."""
    log_term = _log_term(K, H, delta)
    gamma = 192 * c ** (1 / (d_c + 2)) * d_max ** (-d_c / (d_c + 2))
    return (3 * H ** 2
            + 6 * math.sqrt(2 * H ** 3 * K * log_term)
            + gamma * H * K ** ((d_c + 1) / (d_c + 2)) * (math.sqrt(H ** 3 * log_term) + L * d_max))


def fit_exponent(Ks: Sequence[float], values: Sequence[float]) -> float:
    """Slope of log(values) against log(Ks)."""
    Ks = np.asarray(Ks, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(Ks) < 2 or len(Ks) != len(values):
        raise InvalidInputError("need at least two (K, value) pairs of equal length")
    if np.any(Ks <= 0) or np.any(values <= 0):
        raise InvalidInputError("exponent fit needs positive K and values")
    slope, _ = np.polyfit(np.log(Ks), np.log(values), 1)
    return float(slope)
