"""
Value-Iteration Oracle
======================
Backward induction for Q*_h and V*_h on an m-point state grid x_i = i/(m-1)
with the same grid for actions. Expectations over stochastic arrivals use a
fixed midpoint quadrature on the arrival CDF, so the oracle is deterministic.

Grid error: V* is approximated to within about L/m of the continuous optimum.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from core.errors import InvalidInputError
from environments.base import Environment

logger = logging.getLogger(__name__)

_CACHE: Dict[Tuple, "OracleGrid"] = {}


@dataclass
class OracleGrid:
    """V[h-1] = V*_h for h = 1..H+1 (V[H] = 0); Q[h-1] = Q*_h on (state, action) grid pairs."""
    resolution: int
    grid: np.ndarray
    V: np.ndarray
    Q: np.ndarray

    @property
    def H(self) -> int:
        return self.Q.shape[0]

    def value(self, h: int, x) -> float:
        """V*_h(x), linearly interpolated between grid states."""
        x = float(np.ravel(x)[0]) if np.ndim(x) else float(x)
        return float(np.interp(x, self.grid, self.V[h - 1]))

    def values(self, h: int, xs) -> np.ndarray:
        return np.interp(np.asarray(xs, dtype=float), self.grid, self.V[h - 1])

    def nearest_index(self, x) -> int:
        x = float(np.ravel(x)[0]) if np.ndim(x) else float(x)
        return int(np.clip(np.rint(x * (self.resolution - 1)), 0, self.resolution - 1))

    def greedy_action(self, h: int, x) -> float:
        """argmax_a Q*_h on the grid row nearest to x."""
        row = self.Q[h - 1, self.nearest_index(x)]
        return float(self.grid[int(np.argmax(row))])

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(path, resolution=self.resolution, grid=self.grid, V=self.V, Q=self.Q)
        # np.savez_compressed appends .npz when missing
        return path if path.suffix == ".npz" else path.with_name(path.name + ".npz")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "OracleGrid":
        with np.load(path) as data:
            return cls(int(data["resolution"]), data["grid"], data["V"], data["Q"])


def state_grid(m: int) -> np.ndarray:
    """x_i = i / (m - 1); dyadic points such as 0.75 are exact when (m - 1) allows."""
    return np.arange(m, dtype=float) / (m - 1)


def compute_oracle(env: Environment, H: int, m: int = 201, quadrature_nodes: int = 512) -> OracleGrid:
    """Backward value iteration h = H..1 on the grid."""
    if m < 2:
        raise InvalidInputError(f"oracle resolution must be >= 2, got {m}")
    if H < 1:
        raise InvalidInputError(f"H must be >= 1, got {H}")
    env.validate_horizon(H)

    key = (env.cache_key(), H, m, quadrature_nodes)
    if key in _CACHE:
        return _CACHE[key]

    grid = state_grid(m)
    V = np.zeros((H + 1, m))
    Q = np.zeros((H, m, m))
    for h in range(H, 0, -1):
        reward = env.expected_reward(h, grid, quadrature_nodes)
        Q[h - 1] = reward + env.expected_next_value(h, grid, V[h], quadrature_nodes)
        V[h - 1] = Q[h - 1].max(axis=1)

    oracle = OracleGrid(resolution=m, grid=grid, V=V, Q=Q)
    _CACHE[key] = oracle
    logger.info("oracle for %s: H=%d, m=%d, V*_1 in [%.4f, %.4f]",
                env.name, H, m, V[0].min(), V[0].max())
    return oracle


def clear_cache() -> None:
    _CACHE.clear()
