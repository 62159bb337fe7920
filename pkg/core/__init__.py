"""
Core learning package: metric primitives, adaptive partition, learners and baselines.
"""

from .errors import AdaptiveQLError, ContractViolation, InvalidInputError
from .metric import BoxRegion, Point, SpaceDescriptor, contains, distance, split_region, state_slice_nonempty
from .partition import BallNode, StepPartition, partition_frame, should_split
from .learner import (
    AdaptiveQLearner,
    GreedyPolicy,
    LearnerConfig,
    alpha_weights,
    bonus,
    learning_rate,
    lipschitz_from_primitives,
    v_estimate,
)
from .baselines import (
    MedianAgent,
    NetConfig,
    NetQLearner,
    NoMovementAgent,
    default_epsilon,
    heuristic_median,
    heuristic_no_movement,
)

__all__ = [
    "AdaptiveQLError",
    "ContractViolation",
    "InvalidInputError",
    "BoxRegion",
    "Point",
    "SpaceDescriptor",
    "contains",
    "distance",
    "split_region",
    "state_slice_nonempty",
    "BallNode",
    "StepPartition",
    "partition_frame",
    "should_split",
    "AdaptiveQLearner",
    "GreedyPolicy",
    "LearnerConfig",
    "alpha_weights",
    "bonus",
    "learning_rate",
    "lipschitz_from_primitives",
    "v_estimate",
    "MedianAgent",
    "NetConfig",
    "NetQLearner",
    "NoMovementAgent",
    "default_epsilon",
    "heuristic_median",
    "heuristic_no_movement",
]
