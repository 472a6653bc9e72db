"""
Tests for the sigmoid kernel and exact / tree-pruned density estimates.
"""

import math
import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.append(str(ROOT_DIR))

import numpy as np
import pytest

from metric_forest.cover_tree import build
from metric_forest.datasets import gen_eps_sample, gen_star, gen_tube, gen_tube_queries
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.kde import densest_point, fit_sigmoid, kde_approx, kde_exact, sigmoid
from metric_forest.metric_core import MetricSpaceView


@pytest.fixture
def kernel():
    return fit_sigmoid(0.15, 0.025)


@pytest.fixture
def cloud():
    rng = np.random.default_rng(21)
    return MetricSpaceView.from_points(rng.uniform(size=(400, 2)))


class TestSigmoid:
    """Kernel fitting"""

    def test_transition_band(self, kernel):
        """The kernel drops from 0.99 to 0.01 across the band of width t"""
        assert sigmoid(kernel, 0.15 - 0.0125) == pytest.approx(0.99)
        assert sigmoid(kernel, 0.15 + 0.0125) == pytest.approx(0.01)
        assert sigmoid(kernel, 0.15) == pytest.approx(0.5)

    def test_monotone_decreasing(self, kernel):
        values = sigmoid(kernel, np.linspace(0.0, 1.0, 50))
        assert np.all(np.diff(values) <= 0.0)

    def test_no_overflow_far_away(self, kernel):
        assert 0.0 <= sigmoid(kernel, 1e6) < 1e-300
        assert sigmoid(kernel, 0.0) == pytest.approx(1.0)

    def test_parameters_must_be_positive(self):
        with pytest.raises(InvalidArgumentError):
            fit_sigmoid(0.0, 0.1)
        with pytest.raises(InvalidArgumentError):
            fit_sigmoid(0.1, -1.0)


class TestExact:
    """Brute-force density"""

    def test_line_by_id(self):
        kernel = fit_sigmoid(1.5, 0.1)
        space = MetricSpaceView.from_points([0.0, 1.0, 2.0, 10.0])
        values = kde_exact(kernel, space, [1, 3]).values
        assert values[0] == pytest.approx(3.0, abs=1e-6)
        assert values[1] == pytest.approx(1.0, abs=1e-6)

    def test_coordinate_queries(self):
        kernel = fit_sigmoid(1.5, 0.1)
        space = MetricSpaceView.from_points([0.0, 1.0, 2.0, 10.0])
        values = kde_exact(kernel, space, np.asarray([[9.0], [100.0]])).values
        assert values[0] == pytest.approx(1.0, abs=1e-6)
        assert values[1] == pytest.approx(0.0, abs=1e-6)

    def test_densest_point(self):
        kernel = fit_sigmoid(1.5, 0.1)
        space = MetricSpaceView.from_points([0.0, 1.0, 2.0, 10.0])
        best, value = densest_point(kernel, space)
        assert best == 1
        assert value == pytest.approx(3.0, abs=1e-6)


class TestApproximate:
    """Tree-pruned density"""

    @pytest.mark.parametrize("epsilon", [1e-3, 1e-2, 0.1])
    def test_error_bound(self, kernel, cloud, epsilon):
        """Absolute error is at most epsilon per reference point"""
        tree = build(cloud)
        queries = np.random.default_rng(4).uniform(size=(30, 2))
        exact = kde_exact(kernel, cloud, queries).values
        approx = kde_approx(kernel, tree, queries, epsilon)
        assert approx.mode == "approx"
        assert np.all(np.abs(approx.values - exact) <= epsilon * cloud.n + 1e-9)

    def test_pruning_happens(self, kernel, cloud):
        tree = build(cloud)
        approx = kde_approx(kernel, tree, list(range(20)), 0.05)
        assert approx.prunes > 0
        assert len(approx) == 20

    def test_threads_agree(self, kernel, cloud):
        tree = build(cloud)
        ids = list(range(25))
        serial = kde_approx(kernel, tree, ids, 0.01, threads=1)
        threaded = kde_approx(kernel, tree, ids, 0.01, threads=4)
        np.testing.assert_allclose(serial.values, threaded.values)

    def test_epsilon_must_be_positive(self, kernel, cloud):
        with pytest.raises(InvalidArgumentError):
            kde_approx(kernel, build(cloud), [0], 0.0)


class TestTreeSamples:
    """Densities around a tube and a star, 200 queries each"""

    @pytest.fixture(scope="class")
    def tube(self):
        cloud = gen_tube(1000, 0.01, seed=5)
        return cloud, build(cloud), gen_tube_queries(200, 0.01, seed=6)

    @pytest.fixture(scope="class")
    def star(self):
        cloud = gen_eps_sample(gen_star(4, math.pi / 4, seed=7), 1000, 0.01, seed=7)
        queries = np.random.default_rng(8).choice(cloud.n, size=200, replace=False).tolist()
        return cloud, build(cloud), queries

    @pytest.mark.parametrize("epsilon", [0.1, 0.01])
    def test_tube_error_bound(self, tube, epsilon):
        cloud, tree, queries = tube
        kernel = fit_sigmoid(0.05, 0.02)
        exact = kde_exact(kernel, cloud, queries).values
        approx = kde_approx(kernel, tree, queries, epsilon).values
        assert approx.shape == (200,)
        assert np.all(np.abs(approx - exact) <= epsilon * cloud.n + 1e-9)

    @pytest.mark.parametrize("epsilon", [0.1, 0.01])
    def test_star_error_bound(self, star, epsilon):
        cloud, tree, queries = star
        kernel = fit_sigmoid(0.05, 0.02)
        exact = kde_exact(kernel, cloud, queries).values
        approx = kde_approx(kernel, tree, queries, epsilon).values
        assert np.all(np.abs(approx - exact) <= epsilon * cloud.n + 1e-9)

    def test_tube_queries_see_the_whole_cross_section(self, tube):
        """Every query on the mid-plane disc has the tube within r"""
        cloud, _, queries = tube
        values = kde_exact(fit_sigmoid(0.05, 0.02), cloud, queries).values
        assert np.all(values > 1.0)


class TestSigmoidGrid:
    @pytest.mark.parametrize("r", np.logspace(-3, 3, 7).tolist())
    @pytest.mark.parametrize("t", np.logspace(-4, 1, 6).tolist())
    def test_band_edges(self, r, t):
        kernel = fit_sigmoid(r, t)
        assert sigmoid(kernel, r - t / 2) == pytest.approx(0.99, rel=1e-6)
        assert sigmoid(kernel, r + t / 2) == pytest.approx(0.01, rel=1e-6)
