"""
Seeded dataset generators.

Every generator derives its random streams from
``numpy.random.SeedSequence(seed).spawn(...)``, one stream per stage, each
feeding a PCG64 ``default_rng``. The same (family, params, seed) always gives
the same arrays.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from metric_forest.config import settings
from metric_forest.exceptions import GenerationFailureError, InvalidArgumentError
from metric_forest.graphs import StraightLineTree
from metric_forest.metric_core import MetricSpaceView, segment_distance, segment_distance_table
from metric_forest.models import GeneratorSpec
from metric_forest.validators import validate_float, validate_integer, validate_positive_float

logger = logging.getLogger(__name__)

TWO_SET_CROSS_DISTANCE = 2.0 ** 10
MAX_TWO_SET_K = 12
STAR_SCHEDULE_BASE = 400


@dataclass
class Dataset:
    family: str
    space: Optional[MetricSpaceView] = None
    tree: Optional[StraightLineTree] = None


def _streams(seed: Optional[int], count: int) -> List[np.random.Generator]:
    seed = settings.seed if seed is None else seed
    if seed < 0:
        raise InvalidArgumentError("Seed must be non-negative", field="seed", value=seed)
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def _budget(n: int) -> int:
    return settings.generation_budget_factor * max(n, 1)


# ----------------------------------------------------------------------
# metric spaces


def gen_line_cloud(values: Sequence[float]) -> MetricSpaceView:
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise InvalidArgumentError("A line cloud needs at least one value", field="values")
    return MetricSpaceView.from_points(values[:, None])


def gen_uniform_cloud(n: int, dim: int = 2, seed: Optional[int] = None) -> MetricSpaceView:
    n = validate_integer(n, "n", min_value=1)
    dim = validate_integer(dim, "dim", min_value=1)
    (rng,) = _streams(seed, 1)
    return MetricSpaceView.from_points(rng.random((n, dim)))


def _first_differing_bit(i: int, j: int, k: int) -> int:
    """Position (1 = most significant) of the first differing bit of i and j over k bits"""
    return k - (i ^ j).bit_length() + 1


def gen_two_separated_sets(k: int) -> MetricSpaceView:
    """
    Two far-apart copies A and B of the binary-index metric on 2^k points.

    Inside a block, d(p_i, p_j) = 1 + (k + 1 - J) / (k + 1) where J is the
    first differing bit of the k-bit codes of i mod 2^k, for i in 1..2^k.
    Every cross distance is 2^10. Ids 0..2^k-1 are A, the rest are B.
    """
    k = validate_integer(k, "k", min_value=1, max_value=MAX_TWO_SET_K)
    size = 2 ** k
    codes = np.arange(1, size + 1) % size
    block = np.zeros((size, size))
    for a in range(size):
        for b in range(a + 1, size):
            J = _first_differing_bit(int(codes[a]), int(codes[b]), k)
            block[a, b] = block[b, a] = 1.0 + (k + 1 - J) / (k + 1)

    matrix = np.full((2 * size, 2 * size), TWO_SET_CROSS_DISTANCE)
    matrix[:size, :size] = block
    matrix[size:, size:] = block
    return MetricSpaceView.from_matrix(matrix, validate=True)


# ----------------------------------------------------------------------
# straight-line trees


def gen_star(
    n_edges: int,
    min_angle: float,
    edge_length: float = 1.0,
    seed: Optional[int] = None,
) -> StraightLineTree:
    """
    Planar star with equal spokes around the origin.

    Without a seed the spokes are evenly spaced. With one, the angular gaps
    are min_angle plus a Dirichlet share of the slack, under a random rotation.
    """
    n_edges = validate_integer(n_edges, "n_edges", min_value=1)
    min_angle = validate_positive_float(min_angle, "min_angle")
    edge_length = validate_positive_float(edge_length, "edge_length")
    if n_edges > 1 and n_edges * min_angle > 2.0 * math.pi + 1e-12:
        raise InvalidArgumentError(
            f"{n_edges} spokes cannot keep {min_angle} rad apart", field="min_angle", value=min_angle
        )

    if seed is None:
        angles = 2.0 * math.pi * np.arange(n_edges) / n_edges
        if n_edges > 1 and 2.0 * math.pi / n_edges < min_angle - 1e-12:
            raise InvalidArgumentError("Evenly spaced spokes violate min_angle", field="min_angle")
    else:
        gap_rng, rotation_rng = _streams(seed, 2)
        slack = max(2.0 * math.pi - n_edges * min_angle, 0.0)
        gaps = min_angle + slack * gap_rng.dirichlet(np.ones(n_edges))
        angles = rotation_rng.uniform(0.0, 2.0 * math.pi) + np.concatenate([[0.0], np.cumsum(gaps[:-1])])

    spokes = edge_length * np.column_stack([np.cos(angles), np.sin(angles)])
    vertices = np.vstack([np.zeros((1, 2)), spokes])
    return StraightLineTree(vertices=vertices, edges=[(0, j) for j in range(1, n_edges + 1)])


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    cosine = float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(min(1.0, max(-1.0, cosine)))


def gen_sensible_tree(
    n_vertices: int,
    l_max: float,
    l_min: float,
    theta: float,
    w: float,
    seed: Optional[int] = None,
) -> StraightLineTree:
    """
    Random planar tree grown one vertex at a time.

    A vertex v is chosen with probability proportional to its degree (the
    first pick is the root), and the new vertex is placed uniformly in the
    annulus l_min <= |x - v| <= l_max. The candidate is rejected when it makes
    an angle below theta with an edge at v, or comes closer than w to an edge
    not incident to v.
    """
    n_vertices = validate_integer(n_vertices, "n_vertices", min_value=1)
    l_max = validate_positive_float(l_max, "l_max")
    l_min = validate_positive_float(l_min, "l_min")
    theta = validate_positive_float(theta, "theta")
    w = validate_float(w, "w", min_value=0.0)
    if not l_min < l_max:
        raise InvalidArgumentError("l_min must be smaller than l_max", field="l_min", value=l_min)

    rng = _streams(seed, 1)[0]
    vertices = [np.zeros(2)]
    edges: List[tuple] = []
    neighbors: List[List[int]] = [[]]
    budget = _budget(n_vertices)
    attempts = 0

    while len(vertices) < n_vertices:
        attempts += 1
        if attempts > budget:
            raise GenerationFailureError("sensible_tree", attempts - 1)

        if edges:
            degrees = np.asarray([len(nb) for nb in neighbors], dtype=np.float64)
            v = int(rng.choice(len(vertices), p=degrees / degrees.sum()))
        else:
            v = 0
        radius = math.sqrt(rng.uniform(l_min * l_min, l_max * l_max))
        phi = rng.uniform(0.0, 2.0 * math.pi)
        candidate = vertices[v] + radius * np.array([math.cos(phi), math.sin(phi)])
        spoke = candidate - vertices[v]

        if any(_angle(spoke, vertices[u] - vertices[v]) < theta for u in neighbors[v]):
            continue
        if any(
            segment_distance(vertices[v], candidate, vertices[a], vertices[b]) < w
            for a, b in edges
            if v not in (a, b)
        ):
            continue

        vertices.append(candidate)
        neighbors.append([v])
        neighbors[v].append(len(vertices) - 1)
        edges.append((v, len(vertices) - 1))

    logger.debug(f"Sensible tree: {n_vertices} vertices after {attempts} attempts")
    return StraightLineTree(vertices=np.asarray(vertices), edges=edges)


# ----------------------------------------------------------------------
# noisy samples


def _segment_frames(vertices: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """Orthonormal frame per segment, first row along the segment"""
    dim = vertices.shape[1]
    frames = np.zeros((segments.shape[0], dim, dim))
    for e, (a, b) in enumerate(segments):
        direction = vertices[b] - vertices[a]
        length = np.linalg.norm(direction)
        if length == 0.0:
            frames[e] = np.eye(dim)
            continue
        # rows of vt beyond the first span the orthogonal complement
        _, _, vt = np.linalg.svd((direction / length)[None, :])
        frames[e, 0] = direction / length
        frames[e, 1:] = vt[1:]
    return frames


def gen_eps_sample(
    T: StraightLineTree, n_points: int, epsilon: float, seed: Optional[int] = None
) -> MetricSpaceView:
    """
    Uniform Monte-Carlo sample of the epsilon-offset of T.

    Each draw picks a segment with probability proportional to the volume of
    its box [-eps, L + eps] x [-eps, eps]^(m-1), samples the box uniformly and
    keeps the point when it lies within epsilon of T, thinned by the number
    of boxes that could have produced it.
    """
    n_points = validate_integer(n_points, "n_points", min_value=1)
    epsilon = validate_positive_float(epsilon, "epsilon")
    choice_rng, box_rng, thin_rng = _streams(seed, 3)

    vertices = T.vertices
    dim = vertices.shape[1]
    segments = np.asarray(T.edges if T.edges else [(0, 0)], dtype=np.int64)
    frames = _segment_frames(vertices, segments)
    lengths = np.linalg.norm(vertices[segments[:, 1]] - vertices[segments[:, 0]], axis=1)
    volumes = (lengths + 2.0 * epsilon) * (2.0 * epsilon) ** (dim - 1)
    weights = volumes / volumes.sum()

    accepted: List[np.ndarray] = []
    count = 0
    drawn = 0
    budget = _budget(n_points)
    while count < n_points:
        if drawn >= budget:
            raise GenerationFailureError("eps_sample", drawn)
        batch = min(max(64, 2 * (n_points - count)), budget - drawn)
        drawn += batch

        chosen = choice_rng.choice(segments.shape[0], size=batch, p=weights)
        coords = box_rng.uniform(-epsilon, epsilon, size=(batch, dim))
        coords[:, 0] = -epsilon + box_rng.random(batch) * (lengths[chosen] + 2.0 * epsilon)
        points = vertices[segments[chosen, 0]] + np.einsum("bi,bij->bj", coords, frames[chosen])

        table = segment_distance_table(points, vertices, [tuple(s) for s in segments])
        hits = (table <= epsilon).sum(axis=1)
        keep = (hits > 0) & (thin_rng.random(batch) * np.maximum(hits, 1) < 1.0)
        kept = points[keep][: n_points - count]
        accepted.append(kept)
        count += kept.shape[0]

    cloud = np.vstack(accepted)
    logger.debug(f"epsilon-sample: {n_points} points from {drawn} draws")
    return MetricSpaceView.from_points(cloud)


def gen_tube(n_points: int, epsilon: float, seed: Optional[int] = None) -> MetricSpaceView:
    """epsilon-offset of the unit segment along the x-axis in R^3"""
    segment = StraightLineTree(vertices=[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], edges=[(0, 1)])
    return gen_eps_sample(segment, n_points, epsilon, seed)


def gen_tube_queries(n_queries: int, epsilon: float, seed: Optional[int] = None) -> np.ndarray:
    """Uniform points of the epsilon-disc in the plane x = 1/2"""
    n_queries = validate_integer(n_queries, "n_queries", min_value=1)
    epsilon = validate_positive_float(epsilon, "epsilon")
    radius_rng, angle_rng = _streams(seed, 2)
    radius = epsilon * np.sqrt(radius_rng.random(n_queries))
    phi = angle_rng.uniform(0.0, 2.0 * math.pi, n_queries)
    return np.column_stack([np.full(n_queries, 0.5), radius * np.cos(phi), radius * np.sin(phi)])


def star_schedule(i: int) -> int:
    return STAR_SCHEDULE_BASE * (validate_integer(i, "i", min_value=0) + 1)


# ----------------------------------------------------------------------
# dispatch


_TREE_FAMILIES = {"star": gen_star, "sensible_tree": gen_sensible_tree}


def _call(family: str, func, params: Dict[str, Any], **extra):
    try:
        return func(**params, **extra)
    except TypeError as exc:
        raise InvalidArgumentError(f"Bad parameters for '{family}': {exc}", field="params") from exc


def generate(spec: GeneratorSpec) -> Dataset:
    """Build the dataset a GeneratorSpec describes"""
    params = dict(spec.params)
    family = spec.family

    if family == "line_cloud":
        return Dataset(family, space=_call(family, gen_line_cloud, params))
    if family == "uniform":
        return Dataset(family, space=_call(family, gen_uniform_cloud, params, seed=spec.seed))
    if family == "two_separated_sets":
        return Dataset(family, space=_call(family, gen_two_separated_sets, params))
    if family == "tube":
        return Dataset(family, space=_call(family, gen_tube, params, seed=spec.seed))
    if family == "star":
        return Dataset(family, tree=_call(family, gen_star, params))
    if family == "sensible_tree":
        return Dataset(family, tree=_call(family, gen_sensible_tree, params, seed=spec.seed))

    # eps_sample: the tree comes from tree_family with the remaining params
    tree_family = params.pop("tree_family", "star")
    if tree_family not in _TREE_FAMILIES:
        raise InvalidArgumentError(f"Unknown tree family '{tree_family}'", field="tree_family", value=tree_family)
    n_points = params.pop("n_points", None)
    epsilon = params.pop("epsilon", None)
    tree_seed, sample_seed = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(spec.seed).spawn(2))
    if tree_family == "sensible_tree":
        params.setdefault("seed", tree_seed)
    tree = _call(tree_family, _TREE_FAMILIES[tree_family], params)
    cloud = gen_eps_sample(tree, n_points, epsilon, seed=sample_seed)
    return Dataset(family, space=cloud, tree=tree)
