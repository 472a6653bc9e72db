"""
Tests for compressed cover tree construction and structural queries.
"""

import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.append(str(ROOT_DIR))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.sparse.csgraph import shortest_path

from metric_forest.cover_tree import (
    build,
    descendants,
    distinctive_descendants,
    essential_levels,
    height_levels,
    next_level,
    tree_from_dict,
    tree_to_dict,
    verify_tree,
)
from metric_forest.exceptions import (
    DataError,
    DuplicatePointError,
    EmptyStructureError,
    InvalidArgumentError,
)
from metric_forest.metric_core import MetricSpaceView, ceil_log2, deduplicate_points, pairwise_extremes


@pytest.fixture
def line_tree():
    """Cover tree on X = {1, 2, 3, 4, 5} with ids 0..4"""
    return build(MetricSpaceView.from_points([1.0, 2.0, 3.0, 4.0, 5.0]))


clouds = arrays(
    np.float64,
    st.tuples(st.integers(1, 40), st.integers(1, 3)),
    elements=st.floats(-50, 50, allow_nan=False, allow_infinity=False, width=32),
)


class TestBuild:
    """Insertion and the resulting levels"""

    def test_line_levels(self, line_tree):
        """Levels and parents on the unit-spaced line"""
        assert line_tree.root == 0
        assert line_tree.level.tolist() == [2, -1, 0, -1, 1]
        assert line_tree.parent.tolist() == [-1, 0, 0, 2, 0]
        assert line_tree.l_max == 2
        assert line_tree.l_min == -1

    def test_line_tree_is_valid(self, line_tree):
        report = verify_tree(line_tree)
        assert report.ok

    def test_single_point(self):
        tree = build(MetricSpaceView.from_points([[7.0, 7.0]]))
        assert tree.n == 1
        assert tree.level.tolist() == [0]
        assert verify_tree(tree).ok

    def test_empty_space(self):
        with pytest.raises(EmptyStructureError):
            build(MetricSpaceView.from_points(np.zeros((0, 2))))

    def test_duplicate_points(self):
        """Coincident points are rejected with both ids"""
        with pytest.raises(DuplicatePointError) as exc:
            build(MetricSpaceView.from_points([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]))
        assert exc.value.exit_code == 2

    def test_bad_insertion_order(self):
        space = MetricSpaceView.from_points([1.0, 2.0, 3.0])
        with pytest.raises(InvalidArgumentError):
            build(space, insertion_order=[0, 0, 1])

    def test_explicit_space(self):
        """Trees over distance matrices satisfy the same invariants"""
        M = np.array(
            [
                [0.0, 1.0, 2.0, 3.0],
                [1.0, 0.0, 1.5, 2.5],
                [2.0, 1.5, 0.0, 1.0],
                [3.0, 2.5, 1.0, 0.0],
            ]
        )
        tree = build(MetricSpaceView.from_matrix(M))
        assert verify_tree(tree).ok
        assert int(tree.subtree_size[tree.root]) == 4

    @settings(max_examples=60, deadline=None)
    @given(clouds, st.randoms(use_true_random=False))
    def test_invariants_hold_for_any_order(self, points, rnd):
        """Covering, separation and partition hold for every insertion order"""
        unique, _ = deduplicate_points(points)
        space = MetricSpaceView.from_points(unique)
        order = list(range(space.n))
        rnd.shuffle(order)
        tree = build(space, insertion_order=order)
        report = verify_tree(tree)
        assert report.covering_ok
        assert report.separation_ok
        assert report.partition_ok
        assert tree.root == order[0]
        assert sorted(descendants(tree, tree.root).tolist()) == list(range(space.n))


class TestStructuralQueries:
    """Next, essential levels and distinctive descendants"""

    def test_essential_levels(self, line_tree):
        assert essential_levels(line_tree, 0) == [-1, 0, 1, 2]
        assert essential_levels(line_tree, 3) == [-1]

    def test_height(self, line_tree):
        assert height_levels(line_tree) == [-1, 0, 1, 2]

    def test_next_level(self, line_tree):
        assert next_level(line_tree, 0, 2) == 1
        assert next_level(line_tree, 0, 0) == 0
        assert next_level(line_tree, 0, -2) is None

    def test_next_level_above_node(self, line_tree):
        """Next is only defined at or below the node's own level"""
        with pytest.raises(InvalidArgumentError):
            next_level(line_tree, 1, 0)

    def test_distinctive_descendants(self, line_tree):
        assert distinctive_descendants(line_tree, 0, 0).tolist() == [0, 1]
        assert distinctive_descendants(line_tree, 0, 1).tolist() == [0, 1, 2, 3]
        assert distinctive_descendants(line_tree, 0, 2).tolist() == [0, 1, 2, 3, 4]
        assert distinctive_descendants(line_tree, 0, 3).tolist() == [0, 1, 2, 3, 4]

    def test_distinctive_descendants_level_limit(self, line_tree):
        with pytest.raises(InvalidArgumentError):
            distinctive_descendants(line_tree, 0, 4)

    def test_distinctive_sizes_match_sets(self, line_tree):
        """Cached sizes agree with the materialized sets"""
        for p in range(line_tree.n):
            for i in range(int(line_tree.level[p]) - 2, int(line_tree.level[p]) + 2):
                expected = distinctive_descendants(line_tree, p, i).size
                assert line_tree.distinctive_size(p, i) == expected

    def test_unknown_point(self, line_tree):
        with pytest.raises(InvalidArgumentError):
            descendants(line_tree, 9)


class TestSerialization:
    """Tree documents"""

    def test_document_rebuilds_same_tree(self, line_tree):
        rebuilt = tree_from_dict(tree_to_dict(line_tree), line_tree.space)
        assert rebuilt.level.tolist() == line_tree.level.tolist()
        assert rebuilt.parent.tolist() == line_tree.parent.tolist()
        assert rebuilt.root == line_tree.root

    def test_tampered_document_rejected(self, line_tree):
        """A document breaking covering fails re-verification"""
        doc = tree_to_dict(line_tree)
        doc["nodes"][4]["level"] = -3
        doc["nodes"][0]["children"] = {"-1": [1], "0": [2], "-3": [4]}
        with pytest.raises(DataError):
            tree_from_dict(doc, line_tree.space)

    def test_malformed_document(self, line_tree):
        with pytest.raises(DataError):
            tree_from_dict({"n": 5}, line_tree.space)

    def test_size_mismatch(self, line_tree):
        space = MetricSpaceView.from_points([1.0, 2.0])
        with pytest.raises(DataError):
            tree_from_dict(tree_to_dict(line_tree), space)


def _assert_structure(tree):
    """Packing, essential-level count, height and descendant radius"""
    space = tree.space
    n = tree.n
    full = space.cross(np.arange(n), np.arange(n))
    np.fill_diagonal(full, np.inf)

    for i in height_levels(tree):
        cover = np.flatnonzero(tree.level >= i)
        if cover.size > 1:
            assert full[np.ix_(cover, cover)].min() > 2.0**i

    assert sum(len(essential_levels(tree, p)) for p in range(n)) <= 2 * n

    np.fill_diagonal(full, 0.0)
    d_min, diameter = pairwise_extremes(space)
    assert len(height_levels(tree)) <= ceil_log2(diameter / d_min) + 2

    tol = 1e-9 * max(1.0, diameter)
    for p in range(n):
        below = descendants(tree, p)
        assert full[p, below].max() <= 2.0 ** (int(tree.level[p]) + 1) + tol


class TestStructuralBounds:
    """Size and shape bounds on many random spaces"""

    @pytest.mark.parametrize("dim", [1, 2, 3, 8])
    @pytest.mark.parametrize("seed", range(13))
    def test_random_clouds(self, dim, seed):
        rng = np.random.default_rng(100 * dim + seed)
        points = rng.uniform(-1.0, 1.0, size=(60, dim)) * rng.uniform(0.1, 10.0)
        _assert_structure(build(MetricSpaceView.from_points(points)))

    @pytest.mark.parametrize("seed", range(10))
    def test_explicit_matrices(self, seed):
        rng = np.random.default_rng(seed)
        weights = np.triu(rng.integers(1, 9, size=(25, 25)), 1)
        matrix = shortest_path(weights + weights.T, directed=False)
        _assert_structure(build(MetricSpaceView.from_matrix(matrix)))

    def test_line(self, line_tree):
        _assert_structure(line_tree)
