"""
Adaptive Partition
==================
The per-step partition tree. Every node is a dyadic cell carrying an
upper-confidence Q estimate and a visit counter; only leaves are part of the
active partition (a leaf's domain is its whole cell, internal nodes have empty
domains under eager splitting).

Selection descends the tree along branches whose state projection contains the
query state, so a lookup touches O(depth * 2^action_dims) nodes.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from core.errors import ContractViolation, InvalidInputError
from core.metric import (
    BoxRegion,
    Point,
    SpaceDescriptor,
    Vector,
    as_vector,
    split_region,
    state_slice_nonempty,
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class BallNode:
    """One region of the adaptive partition."""
    region: BoxRegion
    q_hat: float
    visits: int = 0
    creation_index: int = 0
    inherited_visits: int = 0
    parent_index: Optional[int] = None
    split_visits: Optional[int] = None
    children: List["BallNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def own_visits(self) -> int:
        """Visits recorded on this node itself, excluding those inherited at creation."""
        return self.visits - self.inherited_visits

    def selection_key(self):
        # max q_hat, then smaller radius, then older node
        return (self.q_hat, -self.region.radius, -self.creation_index)


def should_split(node: BallNode, d_max: float) -> bool:
    """Re-partition rule: split once visits reach (d_max / r)^2."""
    return node.visits >= (d_max / node.region.radius) ** 2


class StepPartition:
    """The partition tree for a single step h."""

    def __init__(self, step: int, space: SpaceDescriptor, initial_q: float):
        self.step = step
        self.space = space
        self.root = BallNode(region=space.root_region(), q_hat=float(initial_q))
        self.nodes: List[BallNode] = [self.root]
        self.leaf_count = 1

    def __repr__(self) -> str:
        return f"StepPartition(step={self.step}, nodes={len(self.nodes)}, leaves={self.leaf_count})"

    def node(self, ball_id: int) -> BallNode:
        if not 0 <= ball_id < len(self.nodes):
            raise ContractViolation(f"unknown ball id {ball_id} at step {self.step}")
        return self.nodes[ball_id]

    def _state(self, x) -> Vector:
        return as_vector(x, self.space.state_dims, "state")

    def relevant_leaves(self, x) -> List[BallNode]:
        """Leaves whose cell contains (x, a) for some action a."""
        x = self._state(x)
        found = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not state_slice_nonempty(node.region, x):
                continue
            if node.is_leaf:
                found.append(node)
            else:
                stack.extend(reversed(node.children))
        return found

    def select_ball(self, x) -> BallNode:
        """Relevant leaf with the largest q_hat (ties: smaller radius, then creation order)."""
        best = None
        for leaf in self.relevant_leaves(x):
            if best is None or leaf.selection_key() > best.selection_key():
                best = leaf
        return best

    def max_q(self, x) -> float:
        return max(leaf.q_hat for leaf in self.relevant_leaves(x))

    def split(self, node: BallNode) -> List[BallNode]:
        """Cover the node's cell with its dyadic children; children inherit q_hat and visits."""
        if not node.is_leaf:
            raise ContractViolation(
                f"ball {node.creation_index} at step {self.step} is already split"
            )
        children = []
        for region in split_region(node.region):
            child = BallNode(
                region=region,
                q_hat=node.q_hat,
                visits=node.visits,
                creation_index=len(self.nodes),
                inherited_visits=node.visits,
                parent_index=node.creation_index,
            )
            self.nodes.append(child)
            children.append(child)
        node.children = children
        node.split_visits = node.visits
        self.leaf_count += len(children) - 1
        logger.debug("step %d: split ball %d (depth %d) at %d visits",
                     self.step, node.creation_index, node.region.depth, node.visits)
        return children

    def leaves(self) -> List[BallNode]:
        found = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                found.append(node)
            else:
                stack.extend(reversed(node.children))
        return found

    # -------------------------------------------------------------------------
    # Dump / reload
    # -------------------------------------------------------------------------

    def to_records(self) -> List[Dict[str, Any]]:
        """One JSON-ready record per node, in creation order."""
        records = []
        for node in self.nodes:
            records.append({
                "step": self.step,
                "depth": node.region.depth,
                "center": list(node.region.center.coords),
                "radius": node.region.radius,
                "q_hat": node.q_hat,
                "visits": node.visits,
                "own_visits": node.own_visits,
                "is_leaf": node.is_leaf,
                "creation_index": node.creation_index,
                "parent_index": node.parent_index,
                "inherited_visits": node.inherited_visits,
                "split_visits": node.split_visits,
            })
        return records

    @classmethod
    def from_records(cls, records: Sequence[Dict[str, Any]], space: SpaceDescriptor) -> "StepPartition":
        """Rebuild a tree from ``to_records`` output."""
        if not records:
            raise InvalidInputError("partition dump is empty")
        ordered = sorted(records, key=lambda r: r["creation_index"])
        tree = cls(step=int(ordered[0]["step"]), space=space, initial_q=0.0)
        tree.nodes = []
        k = space.state_dims
        for rec in ordered:
            coords = tuple(float(c) for c in rec["center"])
            if len(coords) != space.dims:
                raise InvalidInputError(
                    f"node {rec['creation_index']} has {len(coords)} coordinates, expected {space.dims}"
                )
            node = BallNode(
                region=BoxRegion(Point(coords[:k], coords[k:]), float(rec["radius"]), int(rec["depth"])),
                q_hat=float(rec["q_hat"]),
                visits=int(rec["visits"]),
                creation_index=int(rec["creation_index"]),
                inherited_visits=int(rec.get("inherited_visits", 0)),
                parent_index=rec.get("parent_index"),
                split_visits=rec.get("split_visits"),
            )
            if node.creation_index != len(tree.nodes):
                raise InvalidInputError(f"creation indices are not contiguous at {node.creation_index}")
            tree.nodes.append(node)
        for node in tree.nodes[1:]:
            if node.parent_index is None or not 0 <= node.parent_index < node.creation_index:
                raise InvalidInputError(f"node {node.creation_index} has invalid parent {node.parent_index}")
            tree.nodes[node.parent_index].children.append(node)
        tree.root = tree.nodes[0]
        tree.leaf_count = sum(1 for n in tree.nodes if n.is_leaf)
        return tree


def partition_frame(tree: StepPartition) -> pd.DataFrame:
    """Leaf table for external plotting of the discretization."""
    k = tree.space.state_dims
    rows = []
    for leaf in tree.leaves():
        row = {"step": tree.step, "ball_id": leaf.creation_index}
        for i, c in enumerate(leaf.region.center.state):
            row[f"x{i}"] = c
        for i, c in enumerate(leaf.region.center.action):
            row[f"a{i}"] = c
        row.update({
            "depth": leaf.region.depth,
            "radius": leaf.region.radius,
            "q_hat": leaf.q_hat,
            "visits": leaf.visits,
        })
        rows.append(row)
    return pd.DataFrame(rows).sort_values("ball_id").reset_index(drop=True)
