"""
Partition Invariant Checkers
============================
Verifiers for the structural facts the regret analysis relies on:

    - covering: leaf cells tile the space (exact dyadic volume = 1)
    - separation: equal-radius centers are at least one radius apart
    - visit bounds: own/inherited visit counts per radius
    - black-box partitioning conditions (nestedness, visit-vs-diameter, size growth)

Every checker returns a CheckReport that collects passed / failed / warning
messages plus structured counterexamples.
"""

import math
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from core.metric import split_region
from core.partition import StepPartition

# Cap on counterexamples kept per check so reports stay readable
MAX_COUNTEREXAMPLES = 20


@dataclass
class CheckReport:
    """Outcome of one checker."""
    name: str
    passed: List[str] = field(default_factory=list)
    failed: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    timestamp: str = field(default_factory=lambda: datetime.now().isoformat())

    @property
    def ok(self) -> bool:
        return not self.failed

    def fail(self, message: str, **example) -> None:
        self.failed.append(message)
        if example and len(self.counterexamples) < MAX_COUNTEREXAMPLES:
            self.counterexamples.append(example)

    def merge(self, other: "CheckReport", prefix: str = "") -> None:
        self.passed.extend(prefix + m for m in other.passed)
        self.failed.extend(prefix + m for m in other.failed)
        self.warnings.extend(prefix + m for m in other.warnings)
        room = MAX_COUNTEREXAMPLES - len(self.counterexamples)
        self.counterexamples.extend(other.counterexamples[:max(room, 0)])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "ok": self.ok,
            "timestamp": self.timestamp,
            "passed": self.passed,
            "failed": self.failed,
            "warnings": self.warnings,
            "counterexamples": self.counterexamples,
            "details": self.details,
        }


def _pairwise_separation(centers: np.ndarray, radius: float):
    """Return the first pair (i, j, dist) with inf-norm distance < radius, else None."""
    n = len(centers)
    for start in range(0, n, 512):
        block = centers[start:start + 512]
        dist = np.abs(block[:, None, :] - centers[None, :, :]).max(axis=2)
        rows = np.arange(len(block)) + start
        dist[np.arange(len(block)), rows] = np.inf
        bad = np.argwhere(dist < radius)
        if len(bad):
            i, j = bad[0]
            return int(rows[i]), int(j), float(dist[i, j])
    return None


def check_partition_invariants(tree: StepPartition) -> CheckReport:
    """Covering (exact volume, split structure) and separation for one tree."""
    report = CheckReport(name=f"partition_invariants_h{tree.step}")

    # Covering: walk the tree from the root, so detached leaves show up as a deficit
    volume = Fraction(0)
    structural_ok = True
    stack = [tree.root]
    leaves_seen = 0
    while stack:
        node = stack.pop()
        if node.is_leaf:
            volume += node.region.volume()
            leaves_seen += 1
            continue
        expected = split_region(node.region)
        if len(node.children) != len(expected):
            structural_ok = False
            report.fail(
                f"ball {node.creation_index} has {len(node.children)} children, expected {len(expected)}",
                ball=node.creation_index, depth=node.region.depth,
            )
        got = {child.region.center.coords for child in node.children}
        stray = got - {r.center.coords for r in expected}
        if stray:
            structural_ok = False
            report.fail(f"ball {node.creation_index} has children outside its dyadic split",
                        ball=node.creation_index)
        stack.extend(node.children)

    report.details["leaf_volume"] = str(volume)
    report.details["leaves"] = leaves_seen
    if volume == 1:
        report.passed.append("covering: leaf cells tile the space (volume = 1)")
    else:
        deficit = 1 - volume
        report.details["volume_deficit"] = str(deficit)
        report.fail(f"covering: leaf volume {volume}, deficit {deficit}", deficit=str(deficit))
    if structural_ok:
        report.passed.append("covering: every split produced the exact dyadic children")
    if leaves_seen != tree.leaf_count:
        report.warnings.append(f"leaf_count {tree.leaf_count} disagrees with {leaves_seen} reachable leaves")

    # Separation among nodes of equal radius
    by_depth: Dict[int, List] = {}
    for node in tree.nodes:
        by_depth.setdefault(node.region.depth, []).append(node)
    separated = True
    for depth, nodes in sorted(by_depth.items()):
        radius = nodes[0].region.radius
        centers = np.array([n.region.center.coords for n in nodes], dtype=float)
        hit = _pairwise_separation(centers, radius)
        if hit is not None:
            separated = False
            i, j, dist = hit
            report.fail(
                f"separation: balls {nodes[i].creation_index} and {nodes[j].creation_index} "
                f"(radius {radius}) are {dist} apart",
                depth=depth, a=nodes[i].creation_index, b=nodes[j].creation_index, distance=dist,
            )
    if separated:
        report.passed.append("separation: equal-radius centers are >= radius apart")
    return report


def check_visit_bounds(tree: StepPartition, d_max: float) -> CheckReport:
    """Own visits <= 3/4 (d_max/r)^2, inherited >= 1/4 (d_max/r)^2, split at exactly ceil((d_max/r)^2)."""
    report = CheckReport(name=f"visit_bounds_h{tree.step}")
    violations = 0
    for node in tree.nodes:
        r = node.region.radius
        ratio = (d_max / r) ** 2
        if node is tree.root:
            if node.own_visits > 1:
                violations += 1
                report.fail(f"root own visits {node.own_visits} > 1", ball=0, own=node.own_visits)
        else:
            if node.own_visits > 0.75 * ratio:
                violations += 1
                report.fail(
                    f"ball {node.creation_index}: own visits {node.own_visits} > 3/4 (d_max/r)^2 = {0.75 * ratio}",
                    ball=node.creation_index, own=node.own_visits, bound=0.75 * ratio,
                )
            if node.inherited_visits < 0.25 * ratio:
                violations += 1
                report.fail(
                    f"ball {node.creation_index}: inherited visits {node.inherited_visits} < 1/4 (d_max/r)^2 = {0.25 * ratio}",
                    ball=node.creation_index, inherited=node.inherited_visits, bound=0.25 * ratio,
                )
        if node.split_visits is not None and node.split_visits != math.ceil(ratio):
            violations += 1
            report.fail(
                f"ball {node.creation_index}: split at {node.split_visits} visits, expected {math.ceil(ratio)}",
                ball=node.creation_index, split_visits=node.split_visits, expected=math.ceil(ratio),
            )
    report.details["nodes_checked"] = len(tree.nodes)
    report.details["root_own_visits"] = tree.root.own_visits
    if violations == 0:
        report.passed.append(f"visit bounds hold on all {len(tree.nodes)} nodes")
    return report


def check_blackbox_conditions(
    trees: Sequence[StepPartition],
    K: int,
    d_c: float,
    c1: float,
    c2: float,
    size_constant: Optional[float] = None,
) -> CheckReport:
    """
    Conditions for a black-box partitioning scheme:
        1. nested partitions (every node came from splitting its recorded parent)
        2. c1^2 / diam^2 <= n <= c2^2 / diam^2 for every leaf (root exempt from the lower bound)
        3. leaf_count <= C * K^(d_c / (d_c + 2)) when a constant C is supplied
    """
    report = CheckReport(name="blackbox_conditions")
    results = {"nested": True, "visits_vs_diameter": True, "size_growth": None}

    for tree in trees:
        tag = f"h={tree.step}: "
        for node in tree.nodes[1:]:
            parent_idx = node.parent_index
            if parent_idx is None or parent_idx >= node.creation_index:
                results["nested"] = False
                report.fail(tag + f"ball {node.creation_index} has no earlier parent",
                            step=tree.step, ball=node.creation_index)
                continue
            parent = tree.nodes[parent_idx]
            if node not in parent.children or node.region.depth != parent.region.depth + 1:
                results["nested"] = False
                report.fail(tag + f"ball {node.creation_index} is not a child of {parent_idx}",
                            step=tree.step, ball=node.creation_index)

        for leaf in tree.leaves():
            diam = leaf.region.radius
            upper = c2 ** 2 / diam ** 2
            lower = c1 ** 2 / diam ** 2
            if leaf.visits > upper or (leaf is not tree.root and leaf.visits < lower):
                results["visits_vs_diameter"] = False
                report.fail(
                    tag + f"leaf {leaf.creation_index}: n={leaf.visits} outside [{lower}, {upper}]",
                    step=tree.step, ball=leaf.creation_index, visits=leaf.visits,
                )

    if size_constant is not None:
        limit = size_constant * K ** (d_c / (d_c + 2))
        results["size_growth"] = True
        for tree in trees:
            if tree.leaf_count > limit:
                results["size_growth"] = False
                report.fail(f"h={tree.step}: {tree.leaf_count} leaves > {limit:.3f}",
                            step=tree.step, leaves=tree.leaf_count, limit=limit)
        report.details["size_limit"] = limit
    else:
        report.warnings.append("condition 3 skipped: no size constant supplied")

    if results["nested"]:
        report.passed.append("condition 1: partitions are nested")
    if results["visits_vs_diameter"]:
        report.passed.append("condition 2: leaf visits within diameter bounds")
    if results["size_growth"]:
        report.passed.append("condition 3: partition size within C * K^(d_c/(d_c+2))")
    report.details["conditions"] = results
    report.details["leaf_counts"] = [t.leaf_count for t in trees]
    return report
