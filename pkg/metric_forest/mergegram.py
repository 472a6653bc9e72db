"""
Single-linkage dendrograms, mergegrams, 0D persistence and bottleneck distance.
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from metric_forest.boruvka_mst import PartitionForest, SpanningTree, mst_singletree_boruvka
from metric_forest.cover_tree import build
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.metric_core import MetricSpaceView
from metric_forest.validators import validate_positive_float

logger = logging.getLogger(__name__)

Pair = Tuple[float, float]


@dataclass(frozen=True)
class ClusterRecord:
    birth: float
    death: float
    members: FrozenSet[int]


@dataclass(frozen=True)
class MergeEvent:
    scale: float
    merged: Tuple[int, ...]
    new_cluster: int


@dataclass
class Dendrogram:
    n: int
    clusters: List[ClusterRecord]
    events: List[MergeEvent]

    @property
    def leaves(self) -> List[int]:
        return list(range(self.n))

    def merge_scales(self) -> List[float]:
        return [event.scale for event in self.events]

    def partition_at(self, scale: float) -> List[Tuple[int, ...]]:
        """Clusters alive at ``scale``"""
        alive = [c for c in self.clusters if c.birth <= scale < c.death]
        return sorted(tuple(sorted(c.members)) for c in alive)


class Diagram:
    """Multiset of (birth, death) pairs, stored sorted"""

    def __init__(self, pairs: Iterable[Pair] = ()):
        cleaned = []
        for birth, death in pairs:
            birth, death = float(birth), float(death)
            if math.isnan(birth) or math.isnan(death) or death < birth:
                raise InvalidArgumentError(
                    f"Diagram pair ({birth}, {death}) needs death >= birth", field="pairs"
                )
            cleaned.append((birth, death))
        self.pairs: Tuple[Pair, ...] = tuple(sorted(cleaned))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair]) -> "Diagram":
        return cls(pairs)

    def finite(self) -> "Diagram":
        return Diagram(p for p in self.pairs if math.isfinite(p[1]))

    def infinite(self) -> "Diagram":
        return Diagram(p for p in self.pairs if not math.isfinite(p[1]))

    def scaled(self, factor: float) -> "Diagram":
        factor = validate_positive_float(factor, "factor")
        return Diagram((b * factor, d * factor) for b, d in self.pairs)

    def counts(self) -> Counter:
        return Counter(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"Diagram({list(self.pairs)})"


# ----------------------------------------------------------------------
# dendrograms


def _spanning_tree(space: MetricSpaceView) -> SpanningTree:
    return mst_singletree_boruvka(build(space))


def dendrogram_from_spanning_tree(n: int, spanning_tree: SpanningTree) -> Dendrogram:
    """
    Single-linkage dendrogram from MST edges.

    Edges of equal length are merged as one batch, so several clusters joined
    at the same scale form a single multi-way merge event.
    """
    clusters = [ClusterRecord(0.0, math.inf, frozenset([p])) for p in range(n)]
    current = list(range(n))
    forest = PartitionForest(n)
    events: List[MergeEvent] = []

    edges = sorted(spanning_tree.edges, key=lambda e: (e[2], e[0], e[1]))
    for scale, batch in itertools.groupby(edges, key=lambda e: e[2]):
        batch = list(batch)
        links = nx.Graph()
        for a, b, _ in batch:
            ca, cb = current[forest.find(a)], current[forest.find(b)]
            links.add_edge(ca, cb)

        for a, b, _ in batch:
            forest.union(a, b)

        for group in sorted(nx.connected_components(links), key=min):
            merged = tuple(sorted(group))
            members = frozenset().union(*(clusters[c].members for c in merged))
            for c in merged:
                record = clusters[c]
                clusters[c] = ClusterRecord(record.birth, scale, record.members)
            new_id = len(clusters)
            clusters.append(ClusterRecord(scale, math.inf, members))
            events.append(MergeEvent(scale, merged, new_id))
            current[forest.find(min(members))] = new_id

    return Dendrogram(n=n, clusters=clusters, events=events)


def sl_dendrogram(space: MetricSpaceView) -> Dendrogram:
    if space.n == 0:
        raise InvalidArgumentError("Dendrogram needs at least one point", field="n")
    return dendrogram_from_spanning_tree(space.n, _spanning_tree(space))


def mergegram(dendrogram: Dendrogram) -> Diagram:
    """One (birth, death) pair per cluster of the dendrogram"""
    return Diagram((c.birth, c.death) for c in dendrogram.clusters)


def pd0(space: MetricSpaceView, scale_factor: float = 1.0) -> Diagram:
    """Finite pairs (0, l) for the MST edge lengths l, plus one (0, inf)"""
    scale_factor = validate_positive_float(scale_factor, "scale_factor")
    if space.n == 0:
        raise InvalidArgumentError("PD0 needs at least one point", field="n")
    lengths = _spanning_tree(space).lengths
    return Diagram([(0.0, float(l) * scale_factor) for l in lengths] + [(0.0, math.inf)])


def pd0_from_mergegram(diagram: Diagram) -> Diagram:
    """
    Recover PD0 from a mergegram in general position.

    Every merge is binary there, so each finite death value s occurring 2m
    times stands for m MST edges of length s.
    """
    deaths = Counter(d for _, d in diagram.finite())
    pairs = []
    for scale, count in sorted(deaths.items()):
        pairs.extend([(0.0, scale)] * (count // 2))
    return Diagram(pairs + [(0.0, math.inf)])


def ultrametric(dendrogram: Dendrogram) -> MetricSpaceView:
    """u(x, y) = the first scale at which x and y share a cluster"""
    n = dendrogram.n
    U = np.zeros((n, n))
    for event in dendrogram.events:
        blocks = [sorted(dendrogram.clusters[c].members) for c in event.merged]
        for left, right in itertools.combinations(blocks, 2):
            U[np.ix_(left, right)] = event.scale
            U[np.ix_(right, left)] = event.scale
    return MetricSpaceView.from_matrix(U, validate=True)


# ----------------------------------------------------------------------
# bottleneck distance


def _infinite_part(a: Diagram, b: Diagram) -> float:
    births_a = sorted(p[0] for p in a.infinite())
    births_b = sorted(p[0] for p in b.infinite())
    if len(births_a) != len(births_b):
        return math.inf
    if not births_a:
        return 0.0
    return float(max(abs(x - y) for x, y in zip(births_a, births_b)))


def _padded_costs(a: Diagram, b: Diagram) -> np.ndarray:
    """
    Square cost matrix of the matching with diagonal copies.

    Rows: finite points of a, then diagonal copies of b's points.
    Columns: finite points of b, then diagonal copies of a's points.
    """
    P = np.asarray(a.finite().pairs, dtype=np.float64).reshape(-1, 2)
    Q = np.asarray(b.finite().pairs, dtype=np.float64).reshape(-1, 2)
    m, l = P.shape[0], Q.shape[0]
    size = m + l
    costs = np.full((size, size), np.inf)
    if m and l:
        costs[:m, :l] = np.maximum(
            np.abs(P[:, 0][:, None] - Q[:, 0][None, :]),
            np.abs(P[:, 1][:, None] - Q[:, 1][None, :]),
        )
    if m:
        costs[np.arange(m), l + np.arange(m)] = (P[:, 1] - P[:, 0]) / 2.0
    if l:
        costs[m + np.arange(l), np.arange(l)] = (Q[:, 1] - Q[:, 0]) / 2.0
    costs[m:, l:] = 0.0
    return costs


def _perfect_matching_within(costs: np.ndarray, delta: float) -> bool:
    allowed = csr_matrix((costs <= delta).astype(np.int8))
    matching = maximum_bipartite_matching(allowed, perm_type="column")
    return bool(np.all(matching >= 0))


def bottleneck(a: Diagram, b: Diagram) -> float:
    """
    Bottleneck distance with diagonal matching.

    Infinite-death pairs only match each other. For the finite parts the
    answer is the smallest candidate cost admitting a perfect matching,
    found by binary search with a maximum bipartite matching per probe.
    """
    infinite_part = _infinite_part(a, b)
    if math.isinf(infinite_part):
        return math.inf

    costs = _padded_costs(a, b)
    if costs.size == 0:
        return infinite_part

    candidates = np.unique(np.concatenate([[0.0], costs[np.isfinite(costs)]]))
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_within(costs, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(float(candidates[lo]), infinite_part)


def bottleneck_exhaustive(a: Diagram, b: Diagram) -> float:
    """Reference bottleneck distance by enumerating every padded matching"""
    infinite_part = _infinite_part(a, b)
    if math.isinf(infinite_part):
        return math.inf
    costs = _padded_costs(a, b)
    size = costs.shape[0]
    if size == 0:
        return infinite_part
    best = math.inf
    rows = np.arange(size)
    for perm in itertools.permutations(range(size)):
        best = min(best, float(costs[rows, list(perm)].max()))
    return max(best, infinite_part)


def diagram_of_space(space: MetricSpaceView, kind: str = "mergegram", scale_factor: float = 1.0) -> Diagram:
    """Mergegram or PD0 of a space under an optional scale factor"""
    if kind == "pd0":
        return pd0(space, scale_factor=scale_factor)
    if kind != "mergegram":
        raise InvalidArgumentError(f"Unknown diagram kind '{kind}'", field="kind", value=kind)
    diagram = mergegram(sl_dendrogram(space))
    return diagram if scale_factor == 1.0 else diagram.scaled(scale_factor)
