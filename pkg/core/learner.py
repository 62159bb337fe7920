"""
Adaptive Q-Learning Agent
=========================
Model-free episodic Q-learning over an adaptive partition of S x A.

Each step h keeps its own partition tree. In every step the agent:
    1. selects the relevant leaf with the largest upper-confidence Q estimate
    2. plays the action midpoint of that leaf
    3. updates the leaf with learning rate (H+1)/(H+t) towards
       reward + V_hat_{h+1}(next state) + bonus(t)
    4. splits the leaf once its visit count reaches (d_max / r)^2
"""

import copy
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.episode import EpisodicAgent, SplitEvent, StepOutcome
from core.errors import ContractViolation, InvalidInputError
from core.metric import SpaceDescriptor, Vector
from core.partition import StepPartition, should_split

logger = logging.getLogger(__name__)


class BonusForm(Enum):
    """Constant pairs (stochastic, metric) of the confidence bonus."""
    MAIN = "main"
    PSEUDOCODE = "pseudocode"

    @property
    def constants(self) -> Tuple[float, float]:
        return (2.0, 4.0) if self is BonusForm.MAIN else (4.0, 2.0)


class LipschitzKind(Enum):
    TOTAL_VARIATION = "total-variation"
    WASSERSTEIN = "wasserstein"


# =============================================================================
# Configuration
# =============================================================================

@dataclass
class LearnerConfig:
    """Parameters of the Adaptive Q-Learning agent."""
    H: int
    K: int
    delta: float = 0.05
    lipschitz_L: float = 1.0
    d_max: float = 1.0
    bonus_scale_stochastic: float = 1.0
    bonus_scale_metric: float = 1.0
    bonus_form: Union[BonusForm, str] = BonusForm.MAIN

    def __post_init__(self):
        self.bonus_form = BonusForm(self.bonus_form)
        if self.H < 1 or self.K < 1:
            raise InvalidInputError(f"H and K must be >= 1, got H={self.H}, K={self.K}")
        if not 0 < self.delta < 1:
            raise InvalidInputError(f"delta must lie in (0, 1), got {self.delta}")
        if self.lipschitz_L < 0 or self.d_max <= 0:
            raise InvalidInputError("lipschitz_L must be >= 0 and d_max > 0")
        if self.bonus_scale_stochastic < 0 or self.bonus_scale_metric < 0:
            raise InvalidInputError("bonus scales must be >= 0")

    @property
    def bonus_diameter(self) -> float:
        return self.d_max


# =============================================================================
# Schedules and estimates
# =============================================================================

def learning_rate(t: int, H: int) -> float:
    """alpha_t = (H + 1) / (H + t)."""
    if t < 1:
        raise ContractViolation(f"learning rate is defined for t >= 1, got t={t}")
    return (H + 1) / (H + t)


def alpha_weights(t: int, H: int) -> np.ndarray:
    """
    Weights alpha_t^i = alpha_i * prod_{j=i+1..t} (1 - alpha_j), i = 1..t.

    After t visits the recursive update equals sum_i alpha_t^i * target_i.
    """
    if t < 1:
        raise ContractViolation(f"weights are defined for t >= 1, got t={t}")
    i = np.arange(1, t + 1, dtype=float)
    alphas = (H + 1) / (H + i)
    decay = 1.0 - alphas
    # suffix[i] = prod_{j > i} (1 - alpha_j)
    suffix = np.ones(t)
    suffix[:-1] = np.cumprod(decay[::-1])[::-1][1:]
    return alphas * suffix


def blend(q_hat: float, t: int, H: int, target: float) -> float:
    """One step of the Q-learning recursion."""
    alpha = learning_rate(t, H)
    return (1 - alpha) * q_hat + alpha * target


def bonus(t: int, cfg) -> float:
    """
    Confidence radius after t visits:
        s * c1 * sqrt(H^3 ln(4HK/delta) / t) + m * c2 * L * diameter / sqrt(t)

    ``cfg`` is a LearnerConfig (diameter d_max) or a NetConfig (diameter epsilon).
    """
    if t < 1:
        raise ContractViolation(f"bonus is defined for t >= 1, got t={t}")
    c_stoch, c_metric = BonusForm(cfg.bonus_form).constants
    log_term = math.log(4 * cfg.H * cfg.K / cfg.delta)
    stochastic = c_stoch * math.sqrt(cfg.H ** 3 * log_term / t)
    metric = c_metric * cfg.lipschitz_L * cfg.bonus_diameter / math.sqrt(t)
    return cfg.bonus_scale_stochastic * stochastic + cfg.bonus_scale_metric * metric


def v_estimate(tree_next: Optional[StepPartition], x, H: int) -> float:
    """min(H, max relevant q_hat) in the next step's tree; 0 past the horizon."""
    if tree_next is None:
        return 0.0
    return min(float(H), tree_next.max_q(x))


def lipschitz_from_primitives(kind, L1: float, L2: float, H: int, h: int = 1) -> float:
    """Lipschitz constant of Q*_h from reward (L1) and transition (L2) constants."""
    kind = LipschitzKind(kind)
    if L1 < 0 or L2 < 0:
        raise InvalidInputError("L1 and L2 must be >= 0")
    if not 1 <= h <= H:
        raise InvalidInputError(f"h must lie in [1, {H}], got {h}")
    if kind is LipschitzKind.TOTAL_VARIATION:
        return 2 * L1 * H + L2
    return sum(L1 * L2 ** i for i in range(H - h + 1))


# =============================================================================
# Agent
# =============================================================================

class GreedyPolicy:
    """Frozen greedy policy over a copy of the partition trees."""

    def __init__(self, trees: Sequence[StepPartition], episode: int):
        self._trees = copy.deepcopy(list(trees))
        self.episode = episode

    @property
    def H(self) -> int:
        return len(self._trees)

    def act(self, h: int, x) -> Vector:
        return self._trees[h - 1].select_ball(x).region.action_midpoint()

    __call__ = act

    def leaf_counts(self) -> List[int]:
        return [t.leaf_count for t in self._trees]


SnapshotSchedule = Union[str, Sequence[int]]


class AdaptiveQLearner(EpisodicAgent):
    """Adaptive Q-Learning: one partition tree per step, all initialised with q_hat = H."""

    def __init__(
        self,
        config: LearnerConfig,
        space: Optional[SpaceDescriptor] = None,
        snapshots: SnapshotSchedule = "none",
    ):
        super().__init__(H=config.H, K=config.K)
        self.config = config
        self.space = space or SpaceDescriptor()
        if config.d_max != self.space.d_max:
            raise InvalidInputError(
                f"config d_max {config.d_max} does not match the space diameter {self.space.d_max}"
            )
        self.trees = [StepPartition(h, self.space, initial_q=config.H) for h in range(1, config.H + 1)]
        self._snapshot_episodes = self._resolve_schedule(snapshots)
        self.policy_log: Dict[int, GreedyPolicy] = {}

    def _resolve_schedule(self, snapshots: SnapshotSchedule) -> Optional[set]:
        if snapshots == "none":
            return set()
        if snapshots == "all":
            return None
        if isinstance(snapshots, str):
            raise InvalidInputError(f"unknown snapshot schedule {snapshots!r}")
        wanted = set()
        for k in snapshots:
            if k < 1:
                raise InvalidInputError(f"snapshot episode must be >= 1, got {k}")
            if k > self.config.K:
                logger.warning("snapshot at episode %d ignored: only %d episodes", k, self.config.K)
                continue
            wanted.add(int(k))
        return wanted

    def __repr__(self) -> str:
        return f"AdaptiveQLearner(H={self.H}, K={self.K}, episode={self.episode}, leaves={self.partition_sizes()})"

    # -------------------------------------------------------------------------
    # Episode protocol
    # -------------------------------------------------------------------------

    def begin_episode(self) -> None:
        k = self.episode
        if self._snapshot_episodes is None or k in self._snapshot_episodes:
            self.policy_log[k] = GreedyPolicy(self.trees, episode=k)

    def act(self, h: int, x) -> Tuple[int, Vector]:
        ball = self.trees[h - 1].select_ball(x)
        return ball.creation_index, ball.region.action_midpoint()

    def value_estimate(self, h: int, x) -> float:
        return v_estimate(self.trees[h - 1], x, self.H)

    def update(self, h: int, outcome: StepOutcome) -> Optional[SplitEvent]:
        tree = self.trees[h - 1]
        node = tree.node(outcome.chosen_ball)
        if not node.is_leaf:
            raise ContractViolation(
                f"ball {outcome.chosen_ball} at step {h} was already split; its id is stale"
            )
        node.visits += 1
        t = node.visits
        tree_next = self.trees[h] if h < self.H else None
        target = outcome.reward + v_estimate(tree_next, outcome.next_state, self.H) + bonus(t, self.config)
        node.q_hat = blend(node.q_hat, t, self.H, target)

        if should_split(node, self.config.d_max):
            tree.split(node)
            return SplitEvent(
                episode=self.episode,
                step=h,
                ball_id=node.creation_index,
                depth=node.region.depth,
                visits=node.visits,
            )
        return None

    def partition_sizes(self) -> List[int]:
        return [tree.leaf_count for tree in self.trees]

    # -------------------------------------------------------------------------
    # Policies
    # -------------------------------------------------------------------------

    def extract_greedy_policy(self) -> GreedyPolicy:
        """Greedy policy on the current trees, unaffected by later training."""
        return GreedyPolicy(self.trees, episode=self.episode)

    def policy_at(self, k: int) -> GreedyPolicy:
        if k not in self.policy_log:
            raise ContractViolation(f"no policy snapshot was kept for episode {k}")
        return self.policy_log[k]

    def sample_pac_policy(self, rng: np.random.Generator) -> GreedyPolicy:
        """A uniformly drawn policy among the recorded episode snapshots."""
        if not self.policy_log:
            raise ContractViolation("no policy snapshots recorded; enable a snapshot schedule")
        episodes = sorted(self.policy_log)
        return self.policy_log[episodes[int(rng.integers(len(episodes)))]]
