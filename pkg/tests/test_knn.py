"""
Tests for exact and approximate k-nearest-neighbor search on cover trees.
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
from scipy.spatial.distance import cdist

from metric_forest.cover_tree import build
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.knn import (
    all_nearest_neighbors,
    knn_approx,
    knn_batch,
    knn_bruteforce,
    knn_exact,
    lambda_k,
)
from metric_forest.metric_core import MetricSpaceView, deduplicate_points


@pytest.fixture
def line_tree():
    return build(MetricSpaceView.from_points([1.0, 2.0, 3.0, 4.0, 5.0]))


@pytest.fixture
def cloud_tree():
    rng = np.random.default_rng(7)
    return build(MetricSpaceView.from_points(rng.uniform(0.0, 1.0, size=(300, 2))))


planar = arrays(
    np.float64,
    st.tuples(st.integers(2, 40), st.just(2)),
    elements=st.floats(-20, 20, allow_nan=False, allow_infinity=False, width=32),
)


class TestLambda:
    """Selection of the k-th bounding candidate"""

    def test_first_prefix_reaching_k(self):
        assert lambda_k([10, 11, 12], [1.0, 2.0, 3.0], [1, 1, 5], 3) == 12

    def test_ties_broken_by_id(self):
        assert lambda_k([5, 2], [1.0, 1.0], [1, 1], 1) == 2

    def test_short_total_returns_last(self):
        assert lambda_k([0, 1], [0.5, 0.2], [1, 1], 10) == 0

    def test_requires_candidates(self):
        with pytest.raises(InvalidArgumentError):
            lambda_k([], [], [], 1)


class TestExact:
    """Exact search"""

    def test_midpoint_query(self, line_tree):
        """Equidistant neighbors come back in id order"""
        result = knn_exact(line_tree, 3.5, 2)
        assert result.ids.tolist() == [2, 3]
        assert result.distances.tolist() == [0.5, 0.5]
        assert result.kth_distance == 0.5

    def test_id_query_includes_itself(self, line_tree):
        result = knn_exact(line_tree, 0, 2)
        assert result.neighbors == [(0, 0.0), (1, 1.0)]

    def test_k_larger_than_n(self, line_tree):
        result = knn_exact(line_tree, 2.2, 50)
        assert len(result) == 5

    def test_invalid_k(self, line_tree):
        with pytest.raises(InvalidArgumentError):
            knn_exact(line_tree, 1.0, 0)

    def test_wrong_dimension(self, line_tree):
        with pytest.raises(InvalidArgumentError):
            knn_exact(line_tree, [1.0, 2.0], 1)

    def test_assert_mode(self, cloud_tree):
        """Containment checks pass along a normal descent"""
        result = knn_exact(cloud_tree, [0.5, 0.5], 5, assert_mode=True)
        assert len(result) == 5

    def test_matches_bruteforce(self, cloud_tree):
        rng = np.random.default_rng(3)
        for q in rng.uniform(-0.2, 1.2, size=(25, 2)):
            exact = knn_exact(cloud_tree, q, 7)
            brute = knn_bruteforce(cloud_tree.space, q, 7)
            assert exact.ids.tolist() == brute.ids.tolist()
            np.testing.assert_allclose(exact.distances, brute.distances)

    @settings(max_examples=50, deadline=None)
    @given(planar, st.integers(1, 6), st.tuples(st.floats(-25, 25), st.floats(-25, 25)))
    def test_matches_bruteforce_property(self, points, k, q):
        unique, _ = deduplicate_points(points)
        tree = build(MetricSpaceView.from_points(unique))
        exact = knn_exact(tree, list(q), k)
        brute = knn_bruteforce(tree.space, list(q), k)
        np.testing.assert_allclose(exact.distances, brute.distances, rtol=1e-9, atol=1e-9)

    def test_explicit_space(self):
        M = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]])
        tree = build(MetricSpaceView.from_matrix(M))
        assert knn_exact(tree, 2, 2).ids.tolist() == [2, 1]


class TestApproximate:
    """(1+epsilon)-approximate search"""

    @pytest.mark.parametrize("epsilon", [0.1, 0.5, 2.0])
    def test_within_factor(self, cloud_tree, epsilon):
        rng = np.random.default_rng(11)
        for q in rng.uniform(-1.0, 2.0, size=(20, 2)):
            approx = knn_approx(cloud_tree, q, 4, epsilon)
            brute = knn_bruteforce(cloud_tree.space, q, 4)
            assert len(approx) == 4
            assert np.all(approx.distances <= (1.0 + epsilon) * brute.distances + 1e-12)

    def test_far_query_stops_early(self, cloud_tree):
        """A distant query is answered without reaching the leaves"""
        approx = knn_approx(cloud_tree, [100.0, 100.0], 3, 0.5)
        brute = knn_bruteforce(cloud_tree.space, [100.0, 100.0], 3)
        assert np.all(approx.distances <= 1.5 * brute.distances)

    def test_epsilon_must_be_positive(self, cloud_tree):
        with pytest.raises(InvalidArgumentError):
            knn_approx(cloud_tree, [0.0, 0.0], 1, 0.0)


class TestBatch:
    """Batches and all-nearest-neighbors"""

    def test_threaded_batch_keeps_order(self, cloud_tree):
        queries = [[0.1, 0.1], [0.9, 0.9], [0.5, 0.2]]
        serial = knn_batch(cloud_tree, queries, 3, threads=1)
        threaded = knn_batch(cloud_tree, queries, 3, threads=3)
        assert [r.ids.tolist() for r in serial] == [r.ids.tolist() for r in threaded]

    def test_all_nearest_neighbors_excludes_self(self, line_tree):
        ids, dists = all_nearest_neighbors(line_tree, 2)
        assert ids.shape == (5, 2)
        assert ids[0].tolist() == [1, 2]
        assert ids[2].tolist() == [1, 3]
        assert dists[4].tolist() == [1.0, 2.0]
        assert not np.any(ids == np.arange(5)[:, None])

    def test_all_nearest_neighbors_single_point(self):
        tree = build(MetricSpaceView.from_points([[1.0, 1.0]]))
        ids, dists = all_nearest_neighbors(tree, 3)
        assert ids.shape == (1, 0)


def _path_metric(weights):
    """Shortest-path closure of a complete graph with positive integer weights"""
    upper = np.triu(weights, 1)
    return shortest_path(upper + upper.T, directed=False)


integer_weights = st.integers(3, 12).flatmap(
    lambda n: arrays(np.int64, (n, n), elements=st.integers(1, 6))
)


class TestAgreement:
    """Answers compared value for value with brute force"""

    def test_tiny_epsilon_is_exact(self):
        """Approximate search with epsilon 1e-9 returns the exact answer on 50 clouds"""
        for seed in range(50):
            rng = np.random.default_rng(seed)
            tree = build(MetricSpaceView.from_points(rng.uniform(size=(80, 3))))
            for q in rng.uniform(-0.2, 1.2, size=(4, 3)):
                approx = knn_approx(tree, q, 5, 1e-9)
                exact = knn_exact(tree, q, 5)
                assert approx.ids.tolist() == exact.ids.tolist()
                np.testing.assert_array_equal(approx.distances, exact.distances)

    def test_ties_on_a_grid(self):
        """Exact search reproduces brute-force distances and id tie-breaks"""
        grid = np.array([[x, y] for x in range(6) for y in range(6)], dtype=np.float64)
        tree = build(MetricSpaceView.from_points(grid))
        for q in np.array([[x / 2, y / 2] for x in range(-1, 12) for y in range(-1, 12)]):
            for k in (1, 4, 9):
                exact = knn_exact(tree, q, k)
                brute = knn_bruteforce(tree.space, q, k)
                assert exact.ids.tolist() == brute.ids.tolist()
                np.testing.assert_array_equal(exact.distances, brute.distances)

    def test_prefix_in_k(self, cloud_tree):
        """The k nearest are the first k of the k+1 nearest"""
        rng = np.random.default_rng(17)
        for q in rng.uniform(-0.2, 1.2, size=(10, 2)):
            widest = knn_exact(cloud_tree, q, 12)
            for k in range(1, 12):
                result = knn_exact(cloud_tree, q, k)
                assert result.ids.tolist() == widest.ids[:k].tolist()
                assert result.kth_distance <= widest.kth_distance

    @settings(max_examples=50, deadline=None)
    @given(integer_weights, st.integers(1, 5), st.data())
    def test_explicit_matrix_property(self, weights, k, data):
        tree = build(MetricSpaceView.from_matrix(_path_metric(weights)))
        q = data.draw(st.integers(0, tree.n - 1))
        exact = knn_exact(tree, q, k)
        brute = knn_bruteforce(tree.space, q, k)
        assert exact.ids.tolist() == brute.ids.tolist()
        np.testing.assert_array_equal(exact.distances, brute.distances)


class TestApproximationRatio:
    """Many random trials of the (1+epsilon) guarantee"""

    def test_ten_thousand_queries(self):
        epsilons = (0.05, 0.2, 1.0)
        trials = 0
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            points = rng.normal(size=(150, 2))
            tree = build(MetricSpaceView.from_points(points))
            queries = rng.normal(scale=1.5, size=(500, 2))
            truth = np.sort(cdist(queries, points), axis=1)[:, :3]
            for i, q in enumerate(queries):
                epsilon = epsilons[i % len(epsilons)]
                approx = knn_approx(tree, q, 3, epsilon)
                assert np.all(approx.distances <= (1.0 + epsilon) * truth[i] + 1e-12)
                trials += 1
        assert trials == 10_000
