"""
Tree reconstruction from noisy samples of a straight-line tree.

Pipeline: k-nearest-neighbor graph NN_k, completed to the connected graph
MSG_k; sigmoid density of every cloud point; a delta-sparse set of densest
points in the MSG_k path metric; the dense tree DT (an MST of those points
under the path metric); and a gradient optimization of DT's vertices.
The checkers for the homeomorphism and vertex-count guarantees live here too.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.sparse.csgraph import dijkstra
from scipy.spatial.distance import cdist

from metric_forest.boruvka_mst import PartitionForest, boruvka_classic, mst_singletree_boruvka
from metric_forest.config import settings
from metric_forest.cover_tree import CompressedCoverTree, build
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.graphs import StraightLineTree, WeightedGraph
from metric_forest.kde import fit_sigmoid, kde_approx, kde_exact
from metric_forest.knn import all_nearest_neighbors
from metric_forest.metric_core import (
    EUCLIDEAN,
    MetricSpaceView,
    point_segment_distances,
    segment_distance,
    segment_distance_table,
)
from metric_forest.models import SkeletonReport
from metric_forest.validators import validate_float, validate_integer, validate_positive_float

logger = logging.getLogger(__name__)

AMSE = "AMSE"
MSE = "MSE"

GraphLike = Union[StraightLineTree, WeightedGraph, nx.Graph]


@dataclass
class SparseDense:
    dense: List[int]
    dist: np.ndarray
    ndp: np.ndarray


@dataclass
class GammaMeasurement:
    gamma: float
    separation_ok: bool
    min_gap: float


@dataclass
class GuaranteeCheck:
    """Each hypothesis of the homeomorphism result, measured on one instance"""

    gamma: float
    separation_ok: bool
    connected: bool
    vertices_covered: bool
    delta_required: float
    delta_ok: bool

    @property
    def holds(self) -> bool:
        return self.connected and self.separation_ok and self.vertices_covered and self.delta_ok


@dataclass
class PipelineResult:
    report: SkeletonReport
    tree: StraightLineTree
    dense_tree: StraightLineTree
    graph: WeightedGraph
    sparse_dense: SparseDense


# ----------------------------------------------------------------------
# neighborhood graph


def msg_k(
    space: MetricSpaceView, k: int, tree: Optional[CompressedCoverTree] = None
) -> WeightedGraph:
    """
    k-th minimum spanning graph: NN_k edges plus the shortest extra edges
    that connect its components.
    """
    k = validate_integer(k, "k", min_value=1)
    if space.kind != EUCLIDEAN:
        raise InvalidArgumentError("MSG_k needs a Euclidean point cloud", field="space")
    n = space.n
    tree = build(space) if tree is None else tree

    graph = WeightedGraph(range(n), positions=space.points)
    ids, dists = all_nearest_neighbors(tree, k)
    for p in range(n):
        for q, d in zip(ids[p], dists[p]):
            graph.add_edge(p, int(q), float(d))

    labels = np.zeros(n, dtype=np.int64)
    for label, component in enumerate(nx.connected_components(graph.nx)):
        labels[list(component)] = label
    completion = mst_singletree_boruvka(tree, PartitionForest.from_labels(labels.tolist()))
    for a, b, d in completion.edges:
        graph.add_edge(a, b, d)

    graph.attrs["k"] = k
    graph.attrs["completion_edges"] = len(completion.edges)
    logger.debug(
        f"MSG_{k}: {graph.number_of_edges()} edges, {len(completion.edges)} added for connectivity"
    )
    return graph


# ----------------------------------------------------------------------
# sparse densest points and the dense tree


def path_metric_neighborhood(
    G: WeightedGraph, p: int, delta: float, dist: np.ndarray, ndp: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Flood the delta-neighborhood of dense point p in the path metric.

    A vertex r is claimed when t = Dist(q) + |qr| improves Dist(r) and
    stays below delta; claimed vertices inherit their nearest dense point.
    """
    delta = validate_positive_float(delta, "delta", allow_inf=True)
    dist[p] = 0.0
    ndp[p] = p
    heap = [(0.0, p)]
    while heap:
        t_q, q = heapq.heappop(heap)
        if t_q > dist[q]:
            continue
        for r, length in G.neighbors(q):
            t = dist[q] + length
            if dist[r] > t and t < delta:
                dist[r] = t
                ndp[r] = ndp[q]
                heapq.heappush(heap, (t, r))
    return dist, ndp


def sparse_dense_subset(G: WeightedGraph, f: Sequence[float], delta: float) -> SparseDense:
    """Greedy densest-first selection of vertices not yet within delta of a dense point"""
    n = G.number_of_nodes()
    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] != n:
        raise InvalidArgumentError(f"Density has {f.shape[0]} values, graph has {n} vertices", field="f")

    dist = np.full(n, np.inf)
    ndp = np.arange(n, dtype=np.int64)
    dense: List[int] = []
    for p in np.lexsort((np.arange(n), -f)):
        p = int(p)
        if math.isinf(dist[p]):
            dense.append(p)
            path_metric_neighborhood(G, p, delta, dist, ndp)
    return SparseDense(dense=dense, dist=dist, ndp=ndp)


def dense_tree(G: WeightedGraph, D: Sequence[int], dist: np.ndarray, ndp: np.ndarray) -> StraightLineTree:
    """MST over the dense points of the quotient graph induced by nearest dense points"""
    D = [int(p) for p in D]
    if not D:
        raise InvalidArgumentError("Dense set must not be empty", field="D")
    if G.positions is None:
        raise InvalidArgumentError("Graph has no vertex positions", field="G")

    quotient = WeightedGraph(D)
    for u, v, length in G.edges():
        a, b = int(ndp[u]), int(ndp[v])
        if a != b:
            quotient.add_edge(a, b, dist[u] + dist[v] + length)

    spanning = boruvka_classic(quotient)
    index = {p: i for i, p in enumerate(D)}
    return StraightLineTree(
        vertices=G.positions[D],
        edges=[(index[a], index[b]) for a, b, _ in spanning.edges],
        labels=np.asarray(D),
        weights=[length for _, _, length in spanning.edges],
    )


# ----------------------------------------------------------------------
# guarantee checkers


def _l_max(G: Union[WeightedGraph, float]) -> float:
    if isinstance(G, WeightedGraph):
        return G.l_max()
    return validate_float(G, "l_max", min_value=0.0)


def homeomorphism_delta(
    T: StraightLineTree, G: Union[WeightedGraph, float], gamma: float, epsilon: float
) -> float:
    """2 gamma (eps + eps / sin(theta/2) + l_max(G) / sin(min(theta, pi/2)))"""
    gamma = validate_float(gamma, "gamma", min_value=1.0)
    epsilon = validate_float(epsilon, "epsilon", min_value=0.0)
    theta = T.theta
    if not theta > 0.0:
        raise InvalidArgumentError("Adjacent edges are parallel (theta = 0)", field="theta", value=theta)
    return 2.0 * gamma * (
        epsilon + epsilon / math.sin(theta / 2.0) + _l_max(G) / math.sin(min(theta, math.pi / 2.0))
    )


def vertex_count_bound(T: StraightLineTree, epsilon: float, delta: float, gamma: float) -> float:
    """Upper bound on the number of dense points under the homeomorphism conditions"""
    epsilon = validate_float(epsilon, "epsilon", min_value=0.0)
    delta = validate_positive_float(delta, "delta")
    gamma = validate_float(gamma, "gamma", min_value=1.0)
    ratio = delta / gamma
    if not ratio > 2.0 * epsilon:
        raise InvalidArgumentError(
            "Vertex-count bound needs delta / gamma > 2 epsilon", field="delta", value=delta
        )
    denominator = 2.0 * math.sqrt(ratio * ratio - 4.0 * epsilon * epsilon)
    return float(np.sum(T.edge_lengths + 2.0 * epsilon) / denominator)


def nonadjacent_edge_gap(T: StraightLineTree) -> float:
    """Minimum distance between edges of T that share no vertex"""
    best = math.inf
    verts = T.vertices
    for e, (a, b) in enumerate(T.edges):
        for c, d in T.edges[e + 1 :]:
            if len({a, b, c, d}) < 4:
                continue
            best = min(best, segment_distance(verts[a], verts[b], verts[c], verts[d]))
    return best


def measure_gamma(
    T: StraightLineTree, cloud, G: WeightedGraph, epsilon: float
) -> GammaMeasurement:
    """
    Path-metric distortion of G inside each edge-set of T.

    gamma is the largest d_G(a, b) / d(a, b) over cloud points a, b within
    epsilon of the same edge; separation_ok reports whether non-adjacent
    edges of T are more than l_max(G) + 2 epsilon apart.
    """
    epsilon = validate_float(epsilon, "epsilon", min_value=0.0)
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    if cloud.shape[0] != G.number_of_nodes():
        raise InvalidArgumentError("Graph vertices must be the cloud points", field="G")

    csgraph = G.to_csgraph()
    tol = settings.distance_tolerance
    gamma = 1.0
    for a, b in T.edges:
        near = np.flatnonzero(
            point_segment_distances(cloud, T.vertices[a], T.vertices[b]) <= epsilon + tol
        )
        if near.size < 2:
            continue
        path = dijkstra(csgraph, directed=False, indices=near)[:, near]
        direct = np.linalg.norm(cloud[near][:, None, :] - cloud[near][None, :, :], axis=2)
        mask = direct > 0
        gamma = max(gamma, float(np.max(path[mask] / direct[mask])))

    gap = nonadjacent_edge_gap(T)
    return GammaMeasurement(
        gamma=gamma,
        separation_ok=bool(gap > G.l_max() + 2.0 * epsilon),
        min_gap=gap,
    )


def covers_vertices(T: StraightLineTree, points, epsilon: float) -> bool:
    """Whether every vertex of T lies within epsilon of one of ``points``"""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 0:
        return False
    nearest = cdist(T.vertices, points).min(axis=1)
    return bool(np.all(nearest <= epsilon + settings.distance_tolerance))


def check_guarantee_conditions(
    T: StraightLineTree,
    cloud,
    G: WeightedGraph,
    D: Sequence[int],
    delta: float,
    epsilon: float,
) -> GuaranteeCheck:
    """
    Measure every hypothesis of the homeomorphism result for the dense set D.

    D is taken as produced by ``sparse_dense_subset``, so it is delta-sparse
    in the path metric of G by construction.
    """
    epsilon = validate_float(epsilon, "epsilon", min_value=0.0)
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    measured = measure_gamma(T, cloud, G, epsilon)
    covered = covers_vertices(T, cloud[np.asarray(D, dtype=np.int64)], epsilon)

    required = math.inf
    if T.theta > 0 and math.isfinite(measured.gamma):
        required = homeomorphism_delta(T, G, measured.gamma, epsilon)

    return GuaranteeCheck(
        gamma=measured.gamma,
        separation_ok=measured.separation_ok,
        connected=G.is_connected(),
        vertices_covered=covered,
        delta_required=required,
        delta_ok=bool(delta >= required),
    )


# ----------------------------------------------------------------------
# errors and optimization


def edge_allocation(T: StraightLineTree, cloud, regions: Sequence[int]) -> np.ndarray:
    """
    Allowed-edge mask (points x edges): a point in the region of vertex v
    may only use the edges incident to v.
    """
    regions = np.asarray(regions, dtype=np.int64)
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    if regions.shape[0] != cloud.shape[0]:
        raise InvalidArgumentError("One region per cloud point is required", field="regions")
    edges = np.asarray(T.edges, dtype=np.int64).reshape(-1, 2)
    return (edges[:, 0][None, :] == regions[:, None]) | (edges[:, 1][None, :] == regions[:, None])


def _distance_table(vertices: np.ndarray, edges, cloud: np.ndarray, allocation: Optional[np.ndarray]) -> np.ndarray:
    table = segment_distance_table(cloud, vertices, edges)
    if allocation is not None and len(edges):
        table = np.where(allocation, table, np.inf)
    return table


def mean_square_error(cloud, T: StraightLineTree, allocation: Optional[np.ndarray] = None) -> float:
    """Mean squared distance to the nearest (allowed) edge"""
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    table = _distance_table(T.vertices, T.edges, cloud, allocation)
    return float(np.mean(table.min(axis=1) ** 2))


def mean_distance(cloud, T: StraightLineTree, allocation: Optional[np.ndarray] = None) -> float:
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    table = _distance_table(T.vertices, T.edges, cloud, allocation)
    return float(np.mean(table.min(axis=1)))


def _gradient(vertices: np.ndarray, edges, cloud: np.ndarray, allocation: Optional[np.ndarray]) -> np.ndarray:
    n = cloud.shape[0]
    grad = np.zeros_like(vertices)
    if not len(edges):
        nearest = _distance_table(vertices, edges, cloud, None).argmin(axis=1)
        np.add.at(grad, nearest, 2.0 * (vertices[nearest] - cloud) / n)
        return grad

    edge_idx = np.asarray(edges, dtype=np.int64)
    chosen = _distance_table(vertices, edges, cloud, allocation).argmin(axis=1)
    ia = edge_idx[chosen, 0]
    ib = edge_idx[chosen, 1]
    A = vertices[ia]
    B = vertices[ib]
    direction = B - A
    length_sq = np.einsum("ij,ij->i", direction, direction)
    safe = np.where(length_sq > 0, length_sq, 1.0)
    s = np.where(length_sq > 0, np.clip(np.einsum("ij,ij->i", cloud - A, direction) / safe, 0.0, 1.0), 0.0)
    residual = A + s[:, None] * direction - cloud
    np.add.at(grad, ia, 2.0 * residual * (1.0 - s)[:, None] / n)
    np.add.at(grad, ib, 2.0 * residual * s[:, None] / n)
    return grad


def optimize_skeleton(
    T: StraightLineTree,
    cloud,
    allocation: str = AMSE,
    eta: float = 0.01,
    iters: int = 100,
    regions: Optional[Sequence[int]] = None,
    backtracking_steps: Optional[int] = None,
) -> StraightLineTree:
    """
    Gradient descent on vertex positions of the (allocated) mean squared error.

    Each iteration assigns every cloud point to its nearest allowed segment
    and takes one analytic gradient step; eta is halved until the objective
    does not increase, and the loop ends when no halving helps.
    """
    eta = validate_positive_float(eta, "eta")
    iters = validate_integer(iters, "iters", min_value=0)
    steps = settings.backtracking_steps if backtracking_steps is None else backtracking_steps
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    if allocation not in (AMSE, MSE):
        raise InvalidArgumentError(f"Unknown allocation '{allocation}'", field="allocation", value=allocation)

    mask = None
    if allocation == AMSE and T.edges:
        if regions is None:
            regions = segment_distance_table(cloud, T.vertices, []).argmin(axis=1)
        mask = edge_allocation(T, cloud, regions)

    def objective(V):
        return float(np.mean(_distance_table(V, T.edges, cloud, mask).min(axis=1) ** 2))

    V = np.array(T.vertices)
    current = objective(V)
    for iteration in range(iters):
        grad = _gradient(V, T.edges, cloud, mask)
        if not np.any(grad):
            break
        step = eta
        accepted = False
        for _ in range(steps + 1):
            candidate = V - step * grad
            value = objective(candidate)
            if value <= current:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            logger.debug(f"Skeleton optimization stalled after {iteration} iterations")
            break
        V, current = candidate, value

    return T.with_vertices(V)


# ----------------------------------------------------------------------
# recognition metrics


def _degrees(G: GraphLike) -> np.ndarray:
    if isinstance(G, StraightLineTree):
        return G.degrees
    if isinstance(G, WeightedGraph):
        return G.degrees()
    return np.asarray([d for _, d in G.degree()], dtype=np.int64)


def degree_list_recognition(G: GraphLike, H: GraphLike) -> float:
    """1 - sum_{i=1..k} |q(i,G) - q(i,H)| / |V(G)|, k the max degree of G, floored at 0"""
    deg_g = _degrees(G)
    deg_h = _degrees(H)
    if deg_g.size == 0:
        raise InvalidArgumentError("Reference graph must not be empty", field="G")
    k = int(deg_g.max())
    if k == 0:
        return 1.0
    q_g = np.bincount(deg_g, minlength=k + 1)[1 : k + 1]
    q_h = np.bincount(deg_h, minlength=k + 1)[1 : k + 1]
    return max(0.0, 1.0 - float(np.abs(q_g - q_h).sum()) / deg_g.size)


def smoothed_degree_sequence(T: GraphLike) -> List[int]:
    """Sorted degrees with degree-2 vertices suppressed"""
    return sorted(int(d) for d in _degrees(T) if d != 2)


def is_homeomorphic(T1: GraphLike, T2: GraphLike) -> bool:
    return smoothed_degree_sequence(T1) == smoothed_degree_sequence(T2)


# ----------------------------------------------------------------------
# end-to-end


def full_pipeline(
    cloud,
    k: int,
    r: float,
    t: float,
    delta: float,
    eta: float = 0.01,
    iters: int = 0,
    truth: Optional[StraightLineTree] = None,
    noise: Optional[float] = None,
    kde_epsilon: Optional[float] = None,
) -> PipelineResult:
    """NN_k -> MSG_k -> KDE -> sparse densest points -> dense tree -> optimized dense tree"""
    delta = validate_positive_float(delta, "delta", allow_inf=True)
    space = cloud if isinstance(cloud, MetricSpaceView) else MetricSpaceView.from_points(cloud)
    points = space.points
    tree = build(space)

    graph = msg_k(space, k, tree)
    kernel = fit_sigmoid(r, t)
    ids = list(range(space.n))
    if kde_epsilon is None:
        density = kde_exact(kernel, space, ids).values
    else:
        density = kde_approx(kernel, tree, ids, kde_epsilon).values

    sd = sparse_dense_subset(graph, density, delta)
    dt = dense_tree(graph, sd.dense, sd.dist, sd.ndp)
    index: Dict[int, int] = {p: i for i, p in enumerate(sd.dense)}
    regions = np.asarray([index[int(v)] for v in sd.ndp], dtype=np.int64)
    odt = optimize_skeleton(dt, points, AMSE, eta=eta, iters=iters, regions=regions)

    mask = edge_allocation(dt, points, regions) if dt.edges else None
    report = SkeletonReport(
        n_points=space.n,
        n_dense=len(sd.dense),
        msg_edges=graph.number_of_edges(),
        dense_tree_edges=len(dt.edges),
        directed_hausdorff=odt.directed_hausdorff(points),
        dense_tree_hausdorff=dt.directed_hausdorff(points),
        objective_before=mean_square_error(points, dt, mask),
        objective_after=mean_square_error(points, odt, mask),
    )

    if truth is not None:
        noise = validate_float(noise, "noise", min_value=0.0)
        check = check_guarantee_conditions(truth, points, graph, sd.dense, delta, noise)
        report.gamma = check.gamma
        report.separation_ok = check.separation_ok
        report.vertices_covered = check.vertices_covered
        report.degree_recognition = degree_list_recognition(truth, odt)
        report.hausdorff_ok = bool(report.dense_tree_hausdorff < 2.0 * noise)
        report.ght_conditions_hold = check.holds
        if math.isfinite(check.delta_required):
            report.delta_required = check.delta_required
        if math.isfinite(delta) and math.isfinite(check.gamma) and delta / check.gamma > 2.0 * noise:
            report.vertex_bound = vertex_count_bound(truth, noise, delta, check.gamma)
            report.vertex_bound_ok = bool(report.n_dense <= report.vertex_bound)

    logger.debug(f"Skeleton pipeline: {report.model_dump()}")
    return PipelineResult(report=report, tree=odt, dense_tree=dt, graph=graph, sparse_dense=sd)
