"""Tests for the per-step partition tree."""

import json

import pytest

from core.errors import ContractViolation, InvalidInputError
from core.metric import BoxRegion, Point
from core.partition import BallNode, StepPartition, partition_frame, should_split


def state_interval(node):
    return node.region.lower[0], node.region.upper[0]


class TestRelevantLeaves:

    def test_fresh_tree_only_root(self, fresh_tree):
        assert fresh_tree.relevant_leaves((0.3,)) == [fresh_tree.root]

    def test_after_root_split(self, fresh_tree):
        fresh_tree.split(fresh_tree.root)
        leaves = fresh_tree.relevant_leaves((0.1,))
        assert len(leaves) == 2
        assert all(state_interval(leaf) == (0.0, 0.5) for leaf in leaves)

    def test_after_second_split(self, fresh_tree):
        children = fresh_tree.split(fresh_tree.root)
        fresh_tree.split(children[0])
        leaves = fresh_tree.relevant_leaves((0.1,))
        assert len(leaves) == 3
        depths = sorted(leaf.region.depth for leaf in leaves)
        assert depths == [1, 2, 2]
        assert all(leaf.region.lower[0] <= 0.1 < leaf.region.upper[0] for leaf in leaves)

    def test_accepts_scalar_state(self, fresh_tree):
        assert fresh_tree.relevant_leaves(0.9) == [fresh_tree.root]


class TestSelectBall:

    def test_fresh_tree_selects_root(self, fresh_tree):
        assert fresh_tree.select_ball((0.5,)) is fresh_tree.root

    def test_argmax(self, fresh_tree):
        a, b, _, _ = fresh_tree.split(fresh_tree.root)
        a.q_hat, b.q_hat = 4.0, 3.2
        assert fresh_tree.select_ball((0.2,)) is a
        a.q_hat, b.q_hat = 3.2, 4.0
        assert fresh_tree.select_ball((0.2,)) is b

    def test_tie_prefers_smaller_radius(self, fresh_tree):
        children = fresh_tree.split(fresh_tree.root)
        grandchildren = fresh_tree.split(children[1])
        chosen = fresh_tree.select_ball((0.1,))
        assert chosen.region.radius == 0.25
        assert chosen in grandchildren

    def test_tie_then_prefers_older(self, fresh_tree):
        children = fresh_tree.split(fresh_tree.root)
        assert fresh_tree.select_ball((0.1,)) is children[0]


class TestSplitRule:

    def _node(self, radius, visits):
        depth = {1.0: 0, 0.5: 1, 0.125: 3}[radius]
        return BallNode(region=BoxRegion(Point((0.5,), (0.5,)), radius, depth), q_hat=0.0, visits=visits)

    @pytest.mark.parametrize("radius,visits,expected", [
        (1.0, 1, True),
        (1.0, 0, False),
        (0.5, 3, False),
        (0.5, 4, True),
        (0.125, 63, False),
        (0.125, 64, True),
    ])
    def test_threshold(self, radius, visits, expected):
        assert should_split(self._node(radius, visits), 1.0) is expected


class TestSplit:

    def test_inheritance(self, fresh_tree):
        fresh_tree.root.visits = 1
        children = fresh_tree.split(fresh_tree.root)
        assert len(children) == 4
        assert all(c.q_hat == 5.0 and c.visits == 1 and c.inherited_visits == 1 for c in children)
        assert all(c.parent_index == 0 for c in children)
        assert fresh_tree.root.split_visits == 1

    def test_inheritance_at_depth(self, fresh_tree):
        child = fresh_tree.split(fresh_tree.root)[2]
        child.visits, child.q_hat = 4, 3.7
        grandchildren = fresh_tree.split(child)
        assert all(g.region.radius == 0.25 and g.visits == 4 and g.q_hat == 3.7 for g in grandchildren)

    def test_leaf_count(self, fresh_tree):
        children = fresh_tree.split(fresh_tree.root)
        assert fresh_tree.leaf_count == 4
        fresh_tree.split(children[3])
        assert fresh_tree.leaf_count == 7
        assert len(fresh_tree.leaves()) == 7

    def test_creation_indices_are_monotone(self, fresh_tree):
        children = fresh_tree.split(fresh_tree.root)
        more = fresh_tree.split(children[1])
        assert [n.creation_index for n in fresh_tree.nodes] == list(range(9))
        assert [c.creation_index for c in more] == [5, 6, 7, 8]

    def test_split_non_leaf(self, fresh_tree):
        fresh_tree.split(fresh_tree.root)
        with pytest.raises(ContractViolation):
            fresh_tree.split(fresh_tree.root)

    def test_unknown_ball_id(self, fresh_tree):
        with pytest.raises(ContractViolation):
            fresh_tree.node(3)


class TestDumpReload:

    def test_records_fields(self, fresh_tree):
        fresh_tree.split(fresh_tree.root)
        records = fresh_tree.to_records()
        assert len(records) == 5
        for key in ("step", "depth", "center", "radius", "q_hat", "visits", "own_visits", "is_leaf", "creation_index"):
            assert key in records[0]
        assert records[0]["is_leaf"] is False
        assert records[1]["center"] == [0.25, 0.25]

    def test_dyadic_coordinates_render_exactly(self, fresh_tree):
        node = fresh_tree.root
        for _ in range(3):
            node = fresh_tree.split(node)[0]
        text = json.dumps(fresh_tree.to_records())
        assert "0.0625" in text
        assert "0.125" in text

    def test_reload_roundtrip_structure(self, trained_oil_learner, space):
        tree = trained_oil_learner.trees[0]
        rebuilt = StepPartition.from_records(json.loads(json.dumps(tree.to_records())), space)
        assert rebuilt.leaf_count == tree.leaf_count
        assert rebuilt.to_records() == tree.to_records()

    def test_reload_rejects_bad_parent(self, fresh_tree, space):
        fresh_tree.split(fresh_tree.root)
        records = fresh_tree.to_records()
        records[2]["parent_index"] = 7
        with pytest.raises(InvalidInputError):
            StepPartition.from_records(records, space)

    def test_reload_rejects_empty(self, space):
        with pytest.raises(InvalidInputError):
            StepPartition.from_records([], space)


def test_partition_frame(fresh_tree):
    children = fresh_tree.split(fresh_tree.root)
    fresh_tree.split(children[0])
    frame = partition_frame(fresh_tree)
    assert len(frame) == 7
    assert list(frame.columns) == ["step", "ball_id", "x0", "a0", "depth", "radius", "q_hat", "visits"]
    assert frame["ball_id"].is_monotonic_increasing
