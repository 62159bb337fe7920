"""
Baseline Agents
===============
Comparison agents for the adaptive learner:

    - NetQLearner: the same optimistic Q-learning recursion on a fixed
      uniform epsilon-net of S x A (cell centers at eps/2, 3eps/2, ...)
    - NoMovementAgent: stays where the last request was served (a = x)
    - MedianAgent: relocates to the median of all requests observed so far
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.episode import EpisodicAgent, SplitEvent, StepOutcome
from core.errors import InvalidInputError
from core.learner import BonusForm, blend, bonus
from core.metric import Vector, as_vector

# Slack when turning 1/epsilon into a grid count, so (KH)^(-1/4) = 0.1 gives 10 cells
GRID_COUNT_SLACK = 1e-9


def default_epsilon(K: int, H: int, d: int) -> float:
    """Net spacing (K * H)^(-1 / (d + 2))."""
    if K < 1 or H < 1 or d < 0:
        raise InvalidInputError(f"need K, H >= 1 and d >= 0, got K={K}, H={H}, d={d}")
    return (K * H) ** (-1.0 / (d + 2))


def grid_count(epsilon: float) -> int:
    return max(1, math.ceil(1.0 / epsilon - GRID_COUNT_SLACK))


@dataclass
class NetConfig:
    """Parameters of net-based Q-learning. ``epsilon=None`` picks the default spacing."""
    H: int
    K: int
    delta: float = 0.05
    lipschitz_L: float = 1.0
    bonus_scale_stochastic: float = 1.0
    bonus_scale_metric: float = 1.0
    bonus_form: Union[BonusForm, str] = BonusForm.MAIN
    epsilon: Optional[float] = None
    state_dims: int = 1
    action_dims: int = 1

    def __post_init__(self):
        self.bonus_form = BonusForm(self.bonus_form)
        if self.H < 1 or self.K < 1:
            raise InvalidInputError(f"H and K must be >= 1, got H={self.H}, K={self.K}")
        if not 0 < self.delta < 1:
            raise InvalidInputError(f"delta must lie in (0, 1), got {self.delta}")
        if self.lipschitz_L < 0 or self.bonus_scale_stochastic < 0 or self.bonus_scale_metric < 0:
            raise InvalidInputError("lipschitz_L and bonus scales must be >= 0")
        if self.epsilon is None:
            self.epsilon = default_epsilon(self.K, self.H, self.state_dims + self.action_dims)
        if not 0 < self.epsilon <= 1:
            raise InvalidInputError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    @property
    def bonus_diameter(self) -> float:
        return self.epsilon


class NetQLearner(EpisodicAgent):
    """Optimistic Q-learning on a fixed grid; tables of shape (H, n^state_dims, n^action_dims)."""

    def __init__(self, config: NetConfig):
        super().__init__(H=config.H, K=config.K)
        self.config = config
        self.n = grid_count(config.epsilon)
        self.points = (np.arange(self.n) + 0.5) / self.n
        self._state_shape = (self.n,) * config.state_dims
        self._action_shape = (self.n,) * config.action_dims
        n_states = self.n ** config.state_dims
        n_actions = self.n ** config.action_dims
        self.q_hat = np.full((config.H, n_states, n_actions), float(config.H))
        self.visits = np.zeros((config.H, n_states, n_actions), dtype=np.int64)

    @property
    def table_size(self) -> int:
        """Cells per step; constant over the run."""
        return self.q_hat.shape[1] * self.q_hat.shape[2]

    def snap_index(self, values: Sequence[float]) -> Tuple[int, ...]:
        """Nearest grid index per coordinate, ties to the smaller coordinate."""
        idx = np.ceil(np.asarray(values, dtype=float) * self.n - 1.0)
        return tuple(int(i) for i in np.clip(idx, 0, self.n - 1))

    def _state_row(self, x) -> int:
        x = as_vector(x, self.config.state_dims, "state")
        return int(np.ravel_multi_index(self.snap_index(x), self._state_shape))

    def snap_state(self, x) -> Vector:
        x = as_vector(x, self.config.state_dims, "state")
        return tuple(float(self.points[i]) for i in self.snap_index(x))

    def net_value(self, h: int, x) -> float:
        """min(H, max_a q_hat) at the snapped state; 0 past the horizon."""
        if h > self.H:
            return 0.0
        return min(float(self.H), float(self.q_hat[h - 1, self._state_row(x)].max()))

    def value_estimate(self, h: int, x) -> float:
        return self.net_value(h, x)

    def act(self, h: int, x) -> Tuple[Tuple[int, int], Vector]:
        row = self._state_row(x)
        col = int(np.argmax(self.q_hat[h - 1, row]))
        coords = np.unravel_index(col, self._action_shape)
        action = tuple(float(self.points[i]) for i in coords)
        return (row, col), action

    def update(self, h: int, outcome: StepOutcome) -> Optional[SplitEvent]:
        row, col = outcome.chosen_ball
        self.visits[h - 1, row, col] += 1
        t = int(self.visits[h - 1, row, col])
        target = outcome.reward + self.net_value(h + 1, outcome.next_state) + bonus(t, self.config)
        self.q_hat[h - 1, row, col] = blend(float(self.q_hat[h - 1, row, col]), t, self.H, target)
        return None

    def partition_sizes(self) -> List[int]:
        return [self.table_size] * self.H


# =============================================================================
# Ambulance heuristics
# =============================================================================

def heuristic_no_movement(x) -> Vector:
    """Stay at the current location."""
    if isinstance(x, (int, float)):
        return (float(x),)
    return tuple(float(v) for v in x)


def heuristic_median(arrival_history: Sequence[float]) -> float:
    """Median of the observed requests; 0.5 before any request is seen."""
    if len(arrival_history) == 0:
        return 0.5
    return float(np.median(np.asarray(arrival_history, dtype=float)))


class NoMovementAgent(EpisodicAgent):

    def act(self, h: int, x) -> Tuple[None, Vector]:
        return None, heuristic_no_movement(x)

    def update(self, h: int, outcome: StepOutcome) -> Optional[SplitEvent]:
        return None


class MedianAgent(EpisodicAgent):
    """Relocates to the running median of every request seen, across episodes."""

    def __init__(self, H: int, K: Optional[int] = None):
        super().__init__(H=H, K=K)
        self.arrivals: List[float] = []

    def act(self, h: int, x) -> Tuple[None, Vector]:
        return None, (heuristic_median(self.arrivals),)

    def update(self, h: int, outcome: StepOutcome) -> Optional[SplitEvent]:
        arrival = outcome.arrival if outcome.arrival is not None else outcome.next_state[0]
        self.arrivals.append(float(arrival))
        return None
