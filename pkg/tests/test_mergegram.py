"""
Tests for dendrograms, mergegrams, PD0 and the bottleneck distance.
"""

import math
import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.append(str(ROOT_DIR))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metric_forest.exceptions import InvalidArgumentError
from metric_forest.mergegram import (
    Diagram,
    bottleneck,
    bottleneck_exhaustive,
    diagram_of_space,
    mergegram,
    pd0,
    pd0_from_mergegram,
    sl_dendrogram,
    ultrametric,
)
from metric_forest.metric_core import MetricSpaceView, pairwise_extremes

INF = math.inf
LINE_A = [0.0, 4.0, 6.0, 9.0, 10.0]

GOLDEN_MERGEGRAM = Diagram(
    [(0, 1), (0, 1), (0, 2), (0, 2), (0, 4), (1, 3), (2, 3), (3, 4), (4, INF)]
)
GOLDEN_PD0 = Diagram([(0, 1), (0, 2), (0, 3), (0, 4), (0, INF)])

small_diagrams = st.lists(
    st.tuples(st.integers(0, 6), st.integers(0, 4)).map(lambda p: (float(p[0]), float(p[0] + p[1]))),
    max_size=3,
).map(Diagram)


@pytest.fixture
def line_space():
    return MetricSpaceView.from_points(LINE_A)


class TestDiagram:
    """Multiset semantics"""

    def test_sorted_storage(self):
        assert Diagram([(1, 2), (0, 3)]).pairs == ((0.0, 3.0), (1.0, 2.0))

    def test_equality_counts_multiplicity(self):
        assert Diagram([(0, 1), (0, 1)]) != Diagram([(0, 1)])

    def test_death_before_birth_rejected(self):
        with pytest.raises(InvalidArgumentError):
            Diagram([(2, 1)])

    def test_finite_and_infinite_parts(self):
        diagram = Diagram([(0, 1), (0, INF)])
        assert diagram.finite().pairs == ((0.0, 1.0),)
        assert diagram.infinite().pairs == ((0.0, INF),)

    def test_scaled(self):
        assert Diagram([(1, 2), (0, INF)]).scaled(0.5) == Diagram([(0.5, 1), (0, INF)])


class TestDendrogram:
    """Single-linkage clustering"""

    def test_line_mergegram(self, line_space):
        assert mergegram(sl_dendrogram(line_space)) == GOLDEN_MERGEGRAM

    def test_partition_at(self, line_space):
        dendrogram = sl_dendrogram(line_space)
        assert dendrogram.partition_at(0.0) == [(0,), (1,), (2,), (3,), (4,)]
        assert dendrogram.partition_at(2.5) == [(0,), (1, 2), (3, 4)]
        assert dendrogram.partition_at(10.0) == [(0, 1, 2, 3, 4)]

    def test_multiway_merge(self):
        """Three points at equal distance merge in one event"""
        space = MetricSpaceView.from_matrix(np.ones((3, 3)) - np.eye(3))
        dendrogram = sl_dendrogram(space)
        assert len(dendrogram.events) == 1
        assert dendrogram.events[0].merged == (0, 1, 2)
        assert mergegram(dendrogram) == Diagram([(0, 1), (0, 1), (0, 1), (1, INF)])

    def test_single_point(self):
        dendrogram = sl_dendrogram(MetricSpaceView.from_points([[3.0, 3.0]]))
        assert mergegram(dendrogram) == Diagram([(0, INF)])

    def test_ultrametric(self, line_space):
        u = ultrametric(sl_dendrogram(line_space))
        assert u.distance(0, 4) == 4.0
        assert u.distance(1, 3) == 3.0
        assert u.distance(3, 4) == 1.0


class TestPersistence:
    """PD0 and its recovery from the mergegram"""

    def test_line_pd0(self, line_space):
        assert pd0(line_space) == GOLDEN_PD0

    def test_pd0_from_mergegram(self):
        assert pd0_from_mergegram(GOLDEN_MERGEGRAM) == GOLDEN_PD0

    def test_diagram_of_space(self, line_space):
        assert diagram_of_space(line_space, "pd0") == GOLDEN_PD0
        assert diagram_of_space(line_space, "mergegram", 0.5) == GOLDEN_MERGEGRAM.scaled(0.5)

    def test_unknown_kind(self, line_space):
        with pytest.raises(InvalidArgumentError):
            diagram_of_space(line_space, "pd1")


class TestBottleneck:
    """Bottleneck distance with diagonal matching"""

    def test_point_against_empty(self):
        assert bottleneck(Diagram([(0, 1)]), Diagram()) == 0.5

    def test_two_points(self):
        assert bottleneck(Diagram([(0, 2)]), Diagram([(0, 3)])) == 1.0

    def test_infinite_points(self):
        assert bottleneck(Diagram([(0, INF)]), Diagram([(1, INF)])) == 1.0

    def test_infinite_count_mismatch(self):
        assert bottleneck(Diagram([(0, INF)]), Diagram([(0, 1)])) == INF

    def test_identical(self):
        assert bottleneck(GOLDEN_MERGEGRAM, GOLDEN_MERGEGRAM) == 0.0

    def test_stable_under_perturbation(self, line_space):
        """Moving points by at most s moves the mergegram by at most s"""
        shifted = MetricSpaceView.from_points([0.0, 4.1, 5.9, 9.05, 10.0])
        a = diagram_of_space(line_space)
        b = diagram_of_space(shifted)
        assert bottleneck(a, b) <= 2 * 0.1 + 1e-12

    @settings(max_examples=60, deadline=None)
    @given(small_diagrams, small_diagrams)
    def test_matches_exhaustive(self, a, b):
        assert bottleneck(a, b) == pytest.approx(bottleneck_exhaustive(a, b))

    @settings(max_examples=40, deadline=None)
    @given(small_diagrams, small_diagrams)
    def test_symmetric(self, a, b):
        assert bottleneck(a, b) == pytest.approx(bottleneck(b, a))

    @settings(max_examples=60, deadline=None)
    @given(small_diagrams, small_diagrams, small_diagrams)
    def test_triangle_inequality(self, a, b, c):
        assert bottleneck(a, c) <= bottleneck(a, b) + bottleneck(b, c) + 1e-9


class TestContinuity:
    """Mergegrams of nearby clouds stay close"""

    SCALES = (1e-1, 1e-2, 1e-3)

    @pytest.mark.parametrize("seed", range(20))
    def test_shrinking_perturbation(self, seed):
        rng = np.random.default_rng(seed)
        points = rng.random((30, 2))
        space = MetricSpaceView.from_points(points)
        d_min, _ = pairwise_extremes(space)
        direction = rng.uniform(-1.0, 1.0, size=points.shape)
        reference = diagram_of_space(space)

        distances = []
        for scale in self.SCALES:
            eta = scale * d_min
            moved = MetricSpaceView.from_points(points + eta * direction)
            distance = bottleneck(reference, diagram_of_space(moved))
            assert distance < 10 * eta
            distances.append(distance)

        assert distances[1] <= distances[0] + 1e-12
        assert distances[2] <= distances[1] + 1e-12
