"""
Tests for the seeded dataset generators.
"""

import math
import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.append(str(ROOT_DIR))

import numpy as np
import pytest

from metric_forest.config import settings
from metric_forest.datasets import (
    TWO_SET_CROSS_DISTANCE,
    gen_eps_sample,
    gen_line_cloud,
    gen_sensible_tree,
    gen_star,
    gen_tube,
    gen_tube_queries,
    gen_two_separated_sets,
    gen_uniform_cloud,
    generate,
    star_schedule,
)
from metric_forest.exceptions import GenerationFailureError, InvalidArgumentError
from metric_forest.models import GeneratorSpec
from metric_forest.skeleton import nonadjacent_edge_gap


class TestSpaces:
    """Metric space families"""

    def test_line_cloud(self):
        space = gen_line_cloud([0, 4, 6])
        assert space.dim == 1
        assert space.distance(0, 2) == 6.0

    def test_uniform_is_seeded(self):
        a = gen_uniform_cloud(20, 3, seed=5)
        b = gen_uniform_cloud(20, 3, seed=5)
        c = gen_uniform_cloud(20, 3, seed=6)
        np.testing.assert_array_equal(a.points, b.points)
        assert not np.array_equal(a.points, c.points)
        assert a.points.shape == (20, 3)

    def test_uniform_uses_global_seed(self, monkeypatch):
        monkeypatch.setattr(settings, "seed", 17)
        np.testing.assert_array_equal(gen_uniform_cloud(5).points, gen_uniform_cloud(5, seed=17).points)

    def test_negative_seed(self):
        with pytest.raises(InvalidArgumentError):
            gen_uniform_cloud(5, seed=-1)

    def test_two_separated_sets_distances(self):
        space = gen_two_separated_sets(2)
        assert space.n == 8
        assert space.distance(1, 2) == pytest.approx(4.0 / 3.0)
        assert space.distance(0, 1) == pytest.approx(5.0 / 3.0)
        assert space.distance(0, 4) == TWO_SET_CROSS_DISTANCE
        assert space.distance(5, 6) == space.distance(1, 2)

    def test_two_separated_sets_limit(self):
        with pytest.raises(InvalidArgumentError):
            gen_two_separated_sets(13)

    def test_star_schedule(self):
        assert [star_schedule(i) for i in range(3)] == [400, 800, 1200]


class TestTrees:
    """Straight-line tree families"""

    def test_even_star(self):
        star = gen_star(4, math.pi / 4)
        assert star.n_vertices == 5
        assert star.degrees.tolist() == [4, 1, 1, 1, 1]
        np.testing.assert_allclose(star.vertices[1], [1.0, 0.0])
        assert star.theta == pytest.approx(math.pi / 2)

    def test_seeded_star_keeps_min_angle(self):
        star = gen_star(6, 0.8, edge_length=2.0, seed=3)
        assert star.theta >= 0.8 - 1e-9
        np.testing.assert_allclose(star.edge_lengths, 2.0)

    def test_star_too_crowded(self):
        with pytest.raises(InvalidArgumentError):
            gen_star(7, 1.0)

    def test_sensible_tree_constraints(self):
        tree = gen_sensible_tree(12, 1.0, 0.5, math.pi / 6, 0.1, seed=1)
        assert tree.n_vertices == 12
        assert len(tree.edges) == 11
        assert tree.theta >= math.pi / 6 - 1e-9
        assert np.all(tree.edge_lengths >= 0.5 - 1e-9)
        assert np.all(tree.edge_lengths <= 1.0 + 1e-9)
        assert nonadjacent_edge_gap(tree) >= 0.1

    def test_sensible_tree_is_seeded(self):
        a = gen_sensible_tree(8, 1.0, 0.5, 0.5, 0.05, seed=2)
        b = gen_sensible_tree(8, 1.0, 0.5, 0.5, 0.05, seed=2)
        np.testing.assert_array_equal(a.vertices, b.vertices)
        assert a.edges == b.edges

    def test_sensible_tree_budget(self, monkeypatch):
        monkeypatch.setattr(settings, "generation_budget_factor", 1)
        with pytest.raises(GenerationFailureError) as exc:
            gen_sensible_tree(5, 1.0, 0.5, 3.14159, 0.0, seed=0)
        assert exc.value.exit_code == 2

    def test_sensible_tree_bad_lengths(self):
        with pytest.raises(InvalidArgumentError):
            gen_sensible_tree(5, 0.5, 1.0, 0.5, 0.0)


class TestSamples:
    """Noisy samples around trees"""

    def test_eps_sample_within_offset(self):
        star = gen_star(3, 1.0)
        cloud = gen_eps_sample(star, 300, 0.05, seed=2)
        assert cloud.n == 300
        assert star.directed_hausdorff(cloud.points) <= 0.05 + 1e-12

    def test_eps_sample_is_seeded(self):
        star = gen_star(3, 1.0)
        a = gen_eps_sample(star, 50, 0.05, seed=9)
        b = gen_eps_sample(star, 50, 0.05, seed=9)
        np.testing.assert_array_equal(a.points, b.points)

    def test_eps_sample_covers_every_edge(self):
        star = gen_star(3, 2.0)
        cloud = gen_eps_sample(star, 600, 0.02, seed=4)
        angles = np.arctan2(cloud.points[:, 1], cloud.points[:, 0])
        for spoke in star.vertices[1:]:
            near = np.abs(np.angle(np.exp(1j * (angles - math.atan2(spoke[1], spoke[0]))))) < 0.3
            assert near.sum() > 100

    def test_tube(self):
        tube = gen_tube(200, 0.01, seed=1)
        pts = tube.points
        assert pts.shape == (200, 3)
        assert np.all(pts[:, 0] >= -0.01 - 1e-12)
        assert np.all(pts[:, 0] <= 1.01 + 1e-12)

    def test_tube_queries(self):
        queries = gen_tube_queries(50, 0.01, seed=1)
        assert queries.shape == (50, 3)
        assert np.all(queries[:, 0] == 0.5)
        assert np.all(np.linalg.norm(queries[:, 1:], axis=1) <= 0.01 + 1e-12)


class TestGenerate:
    """Dispatch from a generator spec"""

    def test_eps_sample_spec(self):
        spec = GeneratorSpec(
            family="eps_sample",
            params={"n_edges": 3, "min_angle": 1.0, "n_points": 50, "epsilon": 0.05},
            seed=4,
        )
        dataset = generate(spec)
        assert dataset.space.n == 50
        assert len(dataset.tree.edges) == 3
        np.testing.assert_array_equal(generate(spec).space.points, dataset.space.points)

    def test_sensible_tree_sample(self):
        spec = GeneratorSpec(
            family="eps_sample",
            params={
                "tree_family": "sensible_tree",
                "n_vertices": 5,
                "l_max": 1.0,
                "l_min": 0.5,
                "theta": 0.5,
                "w": 0.05,
                "n_points": 40,
                "epsilon": 0.02,
            },
        )
        dataset = generate(spec)
        assert dataset.tree.n_vertices == 5
        assert dataset.space.n == 40

    def test_two_sets_spec(self):
        dataset = generate(GeneratorSpec(family="two_separated_sets", params={"k": 3}))
        assert dataset.space.n == 16
        assert dataset.tree is None

    def test_unknown_parameter(self):
        with pytest.raises(InvalidArgumentError):
            generate(GeneratorSpec(family="uniform", params={"n": 5, "bogus": 1}))

    def test_unknown_tree_family(self):
        with pytest.raises(InvalidArgumentError):
            generate(GeneratorSpec(family="eps_sample", params={"tree_family": "cycle"}))
