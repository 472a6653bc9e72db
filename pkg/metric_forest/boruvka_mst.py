"""
Minimum spanning trees of finite metric spaces.

The main entry point is single-tree Borůvka over a compressed cover tree:
every round freezes the current partition, computes for every node and
level whether its distinctive descendant set lies inside one cluster
(find_clusters), then finds for every cluster its nearest foreign point by a
pruned top-down descent (boruvka_step) and merges. Prim on the dense metric
and classical Borůvka on an explicit graph serve as oracles.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from metric_forest.config import settings
from metric_forest.cover_tree import CompressedCoverTree, build
from metric_forest.exceptions import (
    DisconnectedGraphError,
    InvalidArgumentError,
    InvalidStateError,
    InvariantViolationError,
)
from metric_forest.graphs import WeightedGraph
from metric_forest.metric_core import MetricSpaceView, power_of_two

logger = logging.getLogger(__name__)

Edge = Tuple[Hashable, Hashable, float]
Partition = List[Tuple[int, ...]]


class PartitionForest:
    """Union-find over point ids; members of each component form a circular list"""

    def __init__(self, n: int):
        self._parent = list(range(n))
        self._rank = [0] * n
        self._next = list(range(n))
        self.component_count = n

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "PartitionForest":
        """Forest whose components are the classes of equal labels"""
        labels = list(labels)
        forest = cls(len(labels))
        first: Dict[int, int] = {}
        for p, label in enumerate(labels):
            if label in first:
                forest.union(first[label], p)
            else:
                first[label] = p
        return forest

    def __len__(self) -> int:
        return len(self._parent)

    def copy(self) -> "PartitionForest":
        other = PartitionForest(0)
        other._parent = list(self._parent)
        other._rank = list(self._rank)
        other._next = list(self._next)
        other.component_count = self.component_count
        return other

    def find(self, x: int) -> int:
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        """Merge the components of a and b; returns the surviving root"""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        if self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1
        self._next[ra], self._next[rb] = self._next[rb], self._next[ra]
        self.component_count -= 1
        return ra

    def members(self, x: int) -> List[int]:
        out = [x]
        y = self._next[x]
        while y != x:
            out.append(y)
            y = self._next[y]
        return sorted(out)

    def labels(self) -> np.ndarray:
        return np.asarray([self.find(x) for x in range(len(self))], dtype=np.int64)

    def roots(self) -> List[int]:
        return [x for x in range(len(self)) if self.find(x) == x]

    def partition(self) -> Partition:
        """Components as sorted tuples, ordered by smallest member"""
        return sorted(tuple(self.members(r)) for r in self.roots())


@dataclass
class SpanningTree:
    """Edge list of a spanning tree plus the Borůvka clustering trace"""

    n: int
    edges: List[Edge]
    rounds: int = 0
    partitions: List[Partition] = field(default_factory=list)

    @property
    def total_weight(self) -> float:
        return float(math.fsum(length for _, _, length in self.edges))

    @property
    def lengths(self) -> np.ndarray:
        return np.sort(np.asarray([length for _, _, length in self.edges], dtype=np.float64))

    def pairs(self) -> List[Tuple[Hashable, Hashable]]:
        return sorted((a, b) if a <= b else (b, a) for a, b, _ in self.edges)

    def is_spanning_tree(self) -> bool:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from((a, b) for a, b, _ in self.edges)
        return self.n > 0 and nx.is_tree(graph)


class TauTable:
    """
    Cluster of descendants for every node and level.

    ``witness[p][g]`` describes S_i(p) for the levels i whose set contains the
    first g child groups of p: -1 when the whole set lies in the cluster of p,
    otherwise a point of the set outside that cluster.
    """

    def __init__(self, tree: CompressedCoverTree, labels: np.ndarray, witness: List[List[int]], visits: int):
        self.tree = tree
        self.labels = labels
        self.witness = witness
        self.visits = visits

    def entry(self, p: int, i: int) -> Tuple[Optional[int], Optional[int]]:
        """(cluster, None) when S_i(p) lies in one cluster, else (None, witness)"""
        w = self.witness[p][self.tree.group_index(p, i)]
        if w < 0:
            return int(self.labels[p]), None
        return None, w

    def is_pure(self, p: int, i: int) -> bool:
        return self.witness[p][self.tree.group_index(p, i)] < 0


def find_clusters(tree: CompressedCoverTree, forest: PartitionForest) -> TauTable:
    """One bottom-up pass computing the cluster of descendants table"""
    if len(forest) != tree.n:
        raise InvalidArgumentError(
            f"Forest covers {len(forest)} points, tree has {tree.n}", field="forest"
        )
    labels = forest.labels()
    witness: List[List[int]] = [[] for _ in range(tree.n)]
    visits = 0

    for p in np.argsort(tree.level, kind="stable"):
        p = int(p)
        visits += 1
        w = -1
        entries = [w]
        for _, group in tree.child_groups(p):
            for c in group:
                visits += 1
                if w >= 0:
                    continue
                if labels[c] != labels[p]:
                    w = c
                elif witness[c][-1] >= 0:
                    w = witness[c][-1]
            entries.append(w)
        witness[p] = entries

    return TauTable(tree, labels, witness, visits)


def _edge_key(q: int, p: int, d: float) -> Tuple[float, int, int]:
    return (d, min(q, p), max(q, p))


def nearest_neighboring_components(
    space: MetricSpaceView, labels: Union[PartitionForest, Sequence[int]], U: int
) -> Tuple[float, Tuple[int, int], List[int]]:
    """
    Brute-force nearest neighboring components of cluster U.

    Returns (distance, best pair (q in U, p outside U) by edge key, sorted
    labels of every component at that distance).
    """
    if isinstance(labels, PartitionForest):
        labels = labels.labels()
    labels = np.asarray(labels, dtype=np.int64)
    inside = np.flatnonzero(labels == U)
    outside = np.flatnonzero(labels != U)
    if inside.size == 0 or outside.size == 0:
        raise InvalidStateError(f"Cluster {U} has no complement")
    block = space.cross(inside, outside)
    d = float(block.min())
    qi, pi = np.nonzero(block == d)
    best = min(_edge_key(int(inside[a]), int(outside[b]), d) for a, b in zip(qi, pi))
    q = best[1] if labels[best[1]] == U else best[2]
    p = best[2] if q == best[1] else best[1]
    nearest = sorted({int(labels[outside[b]]) for b in pi})
    return d, (q, p), nearest


def boruvka_step(
    tree: CompressedCoverTree, tau: TauTable, U: int, assert_mode: Optional[bool] = None
) -> Tuple[int, int, float]:
    """
    Nearest pair (q in U, p outside U) for cluster label U.

    Candidates whose descendant sets lie inside U are skipped. For the rest,
    D(c) is the distance from U to c, and l = min D(c) (plus 2^(j+1) when c
    itself belongs to U) bounds the answer; candidates with
    D(c) > l + 2^(j+1) cannot contain a closer foreign point.
    """
    assert_mode = settings.assert_mode if assert_mode is None else assert_mode
    space = tree.space
    labels = tau.labels
    inside = np.flatnonzero(labels == U)
    if inside.size == 0:
        raise InvalidArgumentError(f"Cluster {U} is empty", field="U", value=U)
    if inside.size == tree.n:
        raise InvalidStateError("Borůvka step needs at least two components")
    tol = settings.distance_tolerance

    target = None
    if assert_mode:
        _, target_pair, _ = nearest_neighboring_components(space, labels, U)
        target = target_pair[1]

    R = [tree.root]
    i = tree.l_max + 1
    while True:
        j = None
        for r in R:
            lvl = tree.next_level(r, i - 1)
            if lvl is not None and (j is None or lvl > j):
                j = lvl
        if j is None:
            break

        C = R + [c for r in R for c in tree.children_at(r, j)]
        C = [c for c in C if not (labels[c] == U and tau.is_pure(c, j))]
        if not C:
            raise InvariantViolationError("boruvka-candidates", f"no candidates left for cluster {U}")

        rho = power_of_two(j + 1)
        own = np.asarray([labels[c] == U for c in C])
        # candidates of U are at distance 0; the block is |U| x foreign candidates
        D = np.zeros(len(C))
        if not own.all():
            D[~own] = space.cross(inside, np.asarray(C)[~own]).min(axis=0)
        bound = float(np.min(D + np.where(own, rho, 0.0)))
        limit = bound + rho
        R = [c for c, dc in zip(C, D) if dc <= limit + tol * (1.0 + limit)]
        i = j

        if assert_mode:
            covered = np.concatenate([tree.distinctive_descendants(r, i) for r in R])
            if target not in covered:
                raise InvariantViolationError(
                    "boruvka-containment",
                    f"nearest foreign point {target} of cluster {U} pruned at level {i}",
                )

    foreign = np.asarray([r for r in R if labels[r] != U], dtype=np.int64)
    block = space.cross(inside, foreign)
    d = float(block.min())
    qi, pi = np.nonzero(block == d)
    _, a, b = min(_edge_key(int(inside[x]), int(foreign[y]), d) for x, y in zip(qi, pi))
    q, p = (a, b) if labels[a] == U else (b, a)

    if assert_mode:
        d_true, pair, _ = nearest_neighboring_components(space, labels, U)
        if d != d_true or (q, p) != pair:
            raise InvariantViolationError(
                "cut-safety",
                f"cluster {U}: step found ({q}, {p}, {d}), brute force {pair} at {d_true}",
            )
    return q, p, d


def mst_singletree_boruvka(
    tree: CompressedCoverTree,
    forest: Optional[PartitionForest] = None,
    assert_mode: Optional[bool] = None,
) -> SpanningTree:
    """
    Minimum spanning tree via single-tree Borůvka.

    With an initial ``forest`` the result is the minimum set of edges that
    connects its components.
    """
    n = tree.n
    forest = PartitionForest(n) if forest is None else forest.copy()
    if len(forest) != n:
        raise InvalidArgumentError(f"Forest covers {len(forest)} points, tree has {n}", field="forest")

    edges: List[Edge] = []
    partitions = [forest.partition()]
    rounds = 0
    while forest.component_count > 1:
        tau = find_clusters(tree, forest)
        proposals: Dict[Tuple[int, int], float] = {}
        for U in sorted(set(tau.labels.tolist())):
            q, p, d = boruvka_step(tree, tau, U, assert_mode=assert_mode)
            proposals[(min(q, p), max(q, p))] = d

        before = forest.component_count
        for (a, b), d in sorted(proposals.items(), key=lambda item: (item[1], item[0])):
            if forest.find(a) != forest.find(b):
                forest.union(a, b)
                edges.append((a, b, d))
        rounds += 1
        partitions.append(forest.partition())
        logger.debug(
            f"Borůvka round {rounds}: {before} -> {forest.component_count} components "
            f"({tau.visits} tau visits)"
        )

    return SpanningTree(n=n, edges=edges, rounds=rounds, partitions=partitions)


def mst_oracle_prim(space: MetricSpaceView) -> SpanningTree:
    """O(n^2) Prim over the complete metric graph; ties go to the lowest id"""
    n = space.n
    if n == 0:
        return SpanningTree(n=0, edges=[])
    all_ids = np.arange(n)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    via = np.full(n, -1, dtype=np.int64)
    best[0] = 0.0
    edges: List[Edge] = []
    for _ in range(n):
        masked = np.where(in_tree, np.inf, best)
        v = int(np.argmin(masked))
        in_tree[v] = True
        if via[v] >= 0:
            a, b = int(via[v]), v
            edges.append((min(a, b), max(a, b), float(best[v])))
        d = space.distances(v, all_ids)
        closer = (~in_tree) & (d < best)
        best[closer] = d[closer]
        via[closer] = v
    return SpanningTree(n=n, edges=edges, rounds=0, partitions=[])


def boruvka_classic(graph: WeightedGraph) -> SpanningTree:
    """
    Classical Borůvka on an explicit weighted graph.

    Vertices are ranked by sorted order; ties between equal lengths break by
    that rank, so the chosen edges never close a cycle.
    """
    nodes = sorted(graph.nodes)
    n = len(nodes)
    if n == 0:
        return SpanningTree(n=0, edges=[])
    if not graph.is_connected():
        raise DisconnectedGraphError(graph.component_count())

    rank = {v: idx for idx, v in enumerate(nodes)}
    edge_list = [(length, rank[a], rank[b]) for a, b, length in graph.edges()]
    edge_list = [(length, min(a, b), max(a, b)) for length, a, b in edge_list]

    forest = PartitionForest(n)
    chosen: List[Edge] = []
    partitions = [_relabel(forest.partition(), nodes)]
    rounds = 0
    while forest.component_count > 1:
        cheapest: Dict[int, Tuple[float, int, int]] = {}
        for key in edge_list:
            _, a, b = key
            ra, rb = forest.find(a), forest.find(b)
            if ra == rb:
                continue
            for r in (ra, rb):
                if r not in cheapest or key < cheapest[r]:
                    cheapest[r] = key
        if not cheapest:
            raise DisconnectedGraphError(forest.component_count)
        for length, a, b in sorted(set(cheapest.values())):
            if forest.find(a) != forest.find(b):
                forest.union(a, b)
                chosen.append((nodes[a], nodes[b], length))
        rounds += 1
        partitions.append(_relabel(forest.partition(), nodes))

    return SpanningTree(n=n, edges=chosen, rounds=rounds, partitions=partitions)


def _relabel(partition: Partition, nodes: List[Hashable]) -> Partition:
    return [tuple(nodes[i] for i in block) for block in partition]


def boruvka_clustering_trace(space: MetricSpaceView) -> List[Partition]:
    """F_0 (singletons), F_1, ... until one cluster remains"""
    return mst_singletree_boruvka(build(space)).partitions


def rho_of_spanning_tree(spanning_tree: SpanningTree) -> float:
    lengths = spanning_tree.lengths
    if lengths.size == 0:
        raise InvalidArgumentError("rho needs at least one MST edge", field="n", value=spanning_tree.n)
    return 17.0 + 8.0 * float(lengths.max()) / float(lengths.min())


def rho(space: MetricSpaceView) -> float:
    """17 + 8 * (longest MST edge / shortest MST edge)"""
    if space.n < 2:
        raise InvalidArgumentError("rho needs at least two points", field="n", value=space.n)
    return rho_of_spanning_tree(mst_singletree_boruvka(build(space)))
