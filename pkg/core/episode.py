"""
Episode Protocol
================
Types shared by every agent that plays the episodic MDP: the per-step outcome
fed back to the agent, the split-event log entry, the episode trace, and the
``EpisodicAgent`` base class that owns the act / step / update loop.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import numpy as np

from core.errors import ContractViolation
from core.metric import Vector, as_vector


@dataclass(frozen=True)
class StepOutcome:
    """What the agent observes after playing one step."""
    chosen_ball: Any
    action: Vector
    reward: float
    next_state: Vector
    arrival: Optional[float] = None


@dataclass(frozen=True)
class SplitEvent:
    episode: int
    step: int
    ball_id: int
    depth: int
    visits: int


@dataclass
class EpisodeTrace:
    """Everything observed during one episode."""
    episode: int
    states: List[Vector] = field(default_factory=list)
    actions: List[Vector] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    ball_ids: List[Any] = field(default_factory=list)
    splits: List[SplitEvent] = field(default_factory=list)
    value_estimates: List[float] = field(default_factory=list)
    partition_sizes: List[int] = field(default_factory=list)
    final_state: Optional[Vector] = None

    @property
    def total_reward(self) -> float:
        return float(sum(self.rewards))

    def __len__(self) -> int:
        return len(self.rewards)


class EpisodicAgent(ABC):
    """
    Base class for agents playing an H-step episodic MDP.

    Subclasses implement ``act`` and ``update``; ``run_episode`` drives the
    H act/step/update cycles and builds the trace.
    """

    def __init__(self, H: int, K: Optional[int] = None):
        self.H = H
        self.K = K
        self.episodes_completed = 0

    @property
    def episode(self) -> int:
        """Index k of the episode about to be (or being) played, starting at 1."""
        return self.episodes_completed + 1

    @abstractmethod
    def act(self, h: int, x) -> Tuple[Any, Vector]:
        """Return (handle, action); the handle is passed back to ``update``."""

    @abstractmethod
    def update(self, h: int, outcome: StepOutcome) -> Optional[SplitEvent]:
        """Incorporate one observed step. Returns a split event when the partition was refined."""

    def value_estimate(self, h: int, x) -> float:
        """Agent's current estimate of V_h(x); NaN when the agent keeps none."""
        return float("nan")

    def partition_sizes(self) -> List[int]:
        """Number of active cells per step (empty for agents without a discretization)."""
        return []

    def begin_episode(self) -> None:
        """Hook run before the first step of every episode."""

    def run_episode(self, env, x1, rng: np.random.Generator) -> EpisodeTrace:
        """Play one episode from ``x1`` against ``env``."""
        if self.K is not None and self.episodes_completed >= self.K:
            raise ContractViolation(f"all {self.K} episodes have already been played")
        self.begin_episode()
        trace = EpisodeTrace(episode=self.episode)
        x = as_vector(x1, env.state_dims, "initial state")
        for h in range(1, self.H + 1):
            trace.value_estimates.append(self.value_estimate(h, x))
            handle, action = self.act(h, x)
            result = env.step(h, x, action, rng)
            next_x = as_vector(result.next_state, env.state_dims, "next state")
            event = self.update(h, StepOutcome(
                chosen_ball=handle,
                action=action,
                reward=result.reward,
                next_state=next_x,
                arrival=result.arrival,
            ))
            trace.states.append(x)
            trace.actions.append(action)
            trace.rewards.append(result.reward)
            trace.ball_ids.append(handle)
            if event is not None:
                trace.splits.append(event)
            x = next_x
        trace.final_state = x
        trace.partition_sizes = self.partition_sizes()
        self.episodes_completed += 1
        return trace
