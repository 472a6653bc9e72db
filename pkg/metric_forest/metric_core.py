"""
Finite metric spaces and the verification primitives shared by every module.

A MetricSpaceView is either a Euclidean point cloud or an explicit dense
distance matrix; points are addressed by integer ids 0..n-1. All Euclidean
distances go through ``scipy.spatial.distance.cdist`` so that the same pair
always yields the same float, whichever routine asks for it.
"""

import logging
import math
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from metric_forest.config import settings
from metric_forest.exceptions import (
    EmptyStructureError,
    InvalidArgumentError,
    MetricViolationError,
    SizeLimitError,
)
from metric_forest.models import MetricAxiomReport, MetricStats
from metric_forest.validators import validate_id_set, validate_point_id

logger = logging.getLogger(__name__)

EUCLIDEAN = "euclidean"
EXPLICIT = "explicit"

# rows per block when scanning all pairs without a dense matrix
_BLOCK_ROWS = 1024

Query = Union[int, float, Sequence[float], np.ndarray]


class MetricSpaceView:
    """Read-only view of a finite metric space"""

    def __init__(
        self,
        kind: str,
        points: Optional[np.ndarray] = None,
        matrix: Optional[np.ndarray] = None,
        validated: bool = True,
    ):
        if kind not in (EUCLIDEAN, EXPLICIT):
            raise InvalidArgumentError(f"Unknown metric space kind '{kind}'", field="kind", value=kind)
        self.kind = kind
        self.validated = validated
        self._points = points
        self._matrix = matrix
        if points is not None:
            points.setflags(write=False)
        if matrix is not None:
            matrix.setflags(write=False)

    @classmethod
    def from_points(cls, points) -> "MetricSpaceView":
        """Build a Euclidean space from an (n, m) array; a flat list is read as 1-D points"""
        arr = np.array(points, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise InvalidArgumentError("Point cloud must be a 2-D array", field="points")
        if arr.shape[1] == 0 and arr.shape[0] > 0:
            raise InvalidArgumentError("Points must have at least one coordinate", field="points")
        if not np.all(np.isfinite(arr)):
            raise MetricViolationError("finite", "Point coordinates must be finite")
        return cls(EUCLIDEAN, points=arr)

    @classmethod
    def from_matrix(
        cls,
        matrix,
        validate: bool = True,
        tolerance: Optional[float] = None,
        max_n: Optional[int] = None,
    ) -> "MetricSpaceView":
        """
        Build an explicit space from a square distance matrix.

        With ``validate`` the matrix must be symmetric (within tolerance, then
        symmetrized exactly), zero on the diagonal and positive elsewhere, and
        for n <= 500 it must also satisfy the triangle inequality. Without it the
        matrix is stored as given, for the axiom verifier to inspect.
        """
        tolerance = settings.distance_tolerance if tolerance is None else tolerance
        max_n = settings.max_explicit_n if max_n is None else max_n

        arr = np.array(matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidArgumentError("Distance matrix must be square", field="matrix")
        n = arr.shape[0]
        if n > max_n:
            raise SizeLimitError("Distance matrix", n, max_n)
        if not np.all(np.isfinite(arr)):
            raise MetricViolationError("finite", "Distance matrix entries must be finite")

        if validate:
            asymmetry = float(np.max(np.abs(arr - arr.T))) if n else 0.0
            if asymmetry > tolerance:
                raise MetricViolationError(
                    "symmetry", "Distance matrix is not symmetric", worst_violation=asymmetry
                )
            upper = np.triu(arr, 1)
            arr = upper + upper.T
            off_diagonal = ~np.eye(n, dtype=bool)
            if n > 1 and float(arr[off_diagonal].min()) <= 0.0:
                raise MetricViolationError(
                    "identity", "Distinct points must have positive distance"
                )
            space = cls(EXPLICIT, matrix=arr)
            if n <= 500:
                report = verify_metric_axioms(space, tolerance=tolerance)
                if not report.triangle_ok:
                    raise MetricViolationError(
                        "triangle",
                        "Distance matrix violates the triangle inequality",
                        worst_violation=report.worst_violation,
                    )
            return space

        return cls(EXPLICIT, matrix=arr, validated=False)

    # ------------------------------------------------------------------
    # shape

    @property
    def n(self) -> int:
        if self.kind == EUCLIDEAN:
            return int(self._points.shape[0])
        return int(self._matrix.shape[0])

    def __len__(self) -> int:
        return self.n

    @property
    def dim(self) -> Optional[int]:
        return int(self._points.shape[1]) if self.kind == EUCLIDEAN else None

    @property
    def points(self) -> np.ndarray:
        if self.kind != EUCLIDEAN:
            raise InvalidArgumentError("Explicit spaces have no coordinates", field="points")
        return self._points

    @property
    def matrix(self) -> np.ndarray:
        if self.kind != EXPLICIT:
            raise InvalidArgumentError("Euclidean spaces have no stored matrix", field="matrix")
        return self._matrix

    def __repr__(self) -> str:
        return f"MetricSpaceView(kind={self.kind!r}, n={self.n})"

    # ------------------------------------------------------------------
    # distances

    def _check_id(self, a, field: str = "point_id") -> int:
        if self.n == 0:
            raise EmptyStructureError("Metric space")
        return validate_point_id(a, self.n, field)

    def _ids(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        if ids.size and (ids.min() < 0 or ids.max() >= self.n):
            raise InvalidArgumentError(
                f"Point ids must lie in [0, {self.n - 1}]", field="ids"
            )
        return ids

    def distance(self, a: int, b: int) -> float:
        a = self._check_id(a, "a")
        b = self._check_id(b, "b")
        if self.kind == EXPLICIT:
            return float(self._matrix[a, b])
        return float(cdist(self._points[[a]], self._points[[b]])[0, 0])

    def distances(self, a: int, ids) -> np.ndarray:
        """Distances from point ``a`` to each id in ``ids``"""
        a = self._check_id(a, "a")
        ids = self._ids(ids)
        if self.kind == EXPLICIT:
            return self._matrix[a, ids].astype(np.float64)
        return cdist(self._points[[a]], self._points[ids])[0]

    def resolve_query(self, query: Query) -> Tuple[Optional[int], Optional[np.ndarray]]:
        """
        Split a query into (point id, coordinates).

        Python and numpy integers are point ids; anything else is a coordinate
        vector in the ambient Euclidean space.
        """
        if isinstance(query, (int, np.integer)) and not isinstance(query, bool):
            return self._check_id(int(query), "query"), None

        if self.kind != EUCLIDEAN:
            raise InvalidArgumentError(
                "Queries on an explicit space must be point ids", field="query", value=query
            )
        coords = np.asarray(query, dtype=np.float64).reshape(-1)
        if coords.shape[0] != self.dim:
            raise InvalidArgumentError(
                f"Query has dimension {coords.shape[0]}, space has {self.dim}",
                field="query",
            )
        if not np.all(np.isfinite(coords)):
            raise InvalidArgumentError("Query coordinates must be finite", field="query")
        return None, coords

    def query_distances(self, query: Query, ids) -> np.ndarray:
        """Distances from a query (point id or coordinates) to each id in ``ids``"""
        point_id, coords = self.resolve_query(query)
        if point_id is not None:
            return self.distances(point_id, ids)
        ids = self._ids(ids)
        return cdist(coords.reshape(1, -1), self._points[ids])[0]

    def cross(self, A, B) -> np.ndarray:
        """|A| x |B| block of distances"""
        A = self._ids(A)
        B = self._ids(B)
        if self.kind == EXPLICIT:
            return self._matrix[np.ix_(A, B)].astype(np.float64)
        return cdist(self._points[A], self._points[B])

    def dense_matrix(self) -> np.ndarray:
        if self.kind == EXPLICIT:
            return np.array(self._matrix)
        return cdist(self._points, self._points)

    def subspace(self, ids) -> "MetricSpaceView":
        ids = self._ids(ids)
        if self.kind == EUCLIDEAN:
            return MetricSpaceView(EUCLIDEAN, points=np.array(self._points[ids]))
        return MetricSpaceView(
            EXPLICIT, matrix=np.array(self._matrix[np.ix_(ids, ids)]), validated=self.validated
        )


# ----------------------------------------------------------------------
# verification and statistics


def verify_metric_axioms(
    space: MetricSpaceView, cap: Optional[int] = None, tolerance: Optional[float] = None
) -> MetricAxiomReport:
    """Exhaustive O(n^3) check of symmetry, identity and the triangle inequality"""
    cap = settings.metric_verify_cap if cap is None else cap
    tolerance = settings.distance_tolerance if tolerance is None else tolerance
    n = space.n
    if n > cap:
        raise SizeLimitError("Metric verification", n, cap)

    if n == 0:
        return MetricAxiomReport(n=0, symmetry_ok=True, identity_ok=True, triangle_ok=True, worst_violation=0.0)

    M = space.dense_matrix()
    scale = max(1.0, float(M.max()))
    tol = tolerance * scale

    symmetry_ok = bool(np.max(np.abs(M - M.T)) <= tol)
    off_diagonal = ~np.eye(n, dtype=bool)
    identity_ok = bool(np.all(np.abs(np.diag(M)) <= tol)) and (
        n == 1 or bool(M[off_diagonal].min() > 0.0)
    )

    worst = -math.inf
    for y in range(n):
        slack = M - M[:, y][:, None] - M[y, :][None, :]
        worst = max(worst, float(slack.max()))
    triangle_ok = worst <= tol

    report = MetricAxiomReport(
        n=n,
        symmetry_ok=symmetry_ok,
        identity_ok=identity_ok,
        triangle_ok=triangle_ok,
        worst_violation=worst,
    )
    logger.debug(f"Metric axioms on n={n}: {report.model_dump()}")
    return report


def pairwise_extremes(space: MetricSpaceView) -> Tuple[float, float]:
    """(smallest positive distance, diameter), scanning row blocks"""
    n = space.n
    if n < 2:
        raise InvalidArgumentError("Pairwise extremes need at least two points", field="n", value=n)

    d_min = math.inf
    diameter = 0.0
    all_ids = np.arange(n)
    for start in range(0, n, _BLOCK_ROWS):
        rows = all_ids[start : start + _BLOCK_ROWS]
        block = space.cross(rows, all_ids)
        block[np.arange(rows.size), rows] = math.inf
        positive = block[block > 0]
        if positive.size:
            d_min = min(d_min, float(positive.min()))
        block[np.arange(rows.size), rows] = 0.0
        diameter = max(diameter, float(block.max()))

    if not math.isfinite(d_min):
        raise MetricViolationError("identity", "All points coincide")
    return d_min, diameter


def aspect_ratio(space: MetricSpaceView) -> float:
    d_min, diameter = pairwise_extremes(space)
    return diameter / d_min


def expansion_constant(space: MetricSpaceView, cap: Optional[int] = None) -> float:
    """
    Smallest c >= 2 with |B(x, 2r)| <= c |B(x, r)| for every center and radius.

    Ball sizes are step functions of r that only change at realized distances,
    so the supremum is taken over those radii.
    """
    cap = settings.metric_verify_cap if cap is None else cap
    n = space.n
    if n > cap:
        raise SizeLimitError("Expansion constant", n, cap)
    if n < 2:
        return 2.0

    M = space.dense_matrix()
    rows = np.sort(M, axis=1)
    radii = np.unique(M[~np.eye(n, dtype=bool)])
    radii = radii[radii > 0]

    best = 2.0
    for x in range(n):
        small = np.searchsorted(rows[x], radii, side="right")
        large = np.searchsorted(rows[x], 2.0 * radii, side="right")
        best = max(best, float(np.max(large / small)))
    return best


def metric_stats(space: MetricSpaceView) -> MetricStats:
    n = space.n
    if n < 2:
        raise InvalidArgumentError("Metric statistics need at least two points", field="n", value=n)
    d_min, diameter = pairwise_extremes(space)
    return MetricStats(
        n=n,
        d_min=d_min,
        diameter=diameter,
        aspect_ratio=diameter / d_min,
        expansion_constant=expansion_constant(space),
    )


def hausdorff(space: MetricSpaceView, A: Iterable[int], B: Iterable[int]) -> float:
    A = validate_id_set(A, space.n, "A")
    B = validate_id_set(B, space.n, "B")
    block = space.cross(A, B)
    return float(max(block.min(axis=1).max(), block.min(axis=0).max()))


def is_delta_sparse(space: MetricSpaceView, S: Iterable[int], delta: float) -> bool:
    S = validate_id_set(S, space.n, "S", allow_empty=True)
    if len(S) < 2:
        return True
    block = space.cross(S, S)
    np.fill_diagonal(block, math.inf)
    return bool(block.min() >= delta)


def deduplicate_points(points) -> Tuple[np.ndarray, np.ndarray]:
    """Drop repeated rows, keeping first occurrences in input order"""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.shape[0] == 0:
        return arr, np.zeros(0, dtype=np.int64)
    _, first = np.unique(arr, axis=0, return_index=True)
    kept = np.sort(first).astype(np.int64)
    if kept.size < arr.shape[0]:
        logger.info(f"Removed {arr.shape[0] - kept.size} duplicate points")
    return arr[kept], kept


# ----------------------------------------------------------------------
# segment geometry


def segment_parameters(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Clamped projection parameter s in [0, 1] of each point onto segment [a, b]"""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    direction = b - a
    length_sq = float(direction @ direction)
    if length_sq == 0.0:
        return np.zeros(points.shape[0])
    return np.clip((points - a) @ direction / length_sq, 0.0, 1.0)


def point_segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    s = segment_parameters(points, a, b)
    closest = a + s[:, None] * (b - a)
    return np.linalg.norm(points - closest, axis=1)


def segment_distance(a0, a1, b0, b1, eps: float = 1e-300) -> float:
    """Minimum distance between segments [a0, a1] and [b0, b1] in any dimension"""
    a0, a1, b0, b1 = (np.asarray(v, dtype=np.float64) for v in (a0, a1, b0, b1))
    d1 = a1 - a0
    d2 = b1 - b0
    r = a0 - b0
    a = float(d1 @ d1)
    e = float(d2 @ d2)
    f = float(d2 @ r)

    if a <= eps and e <= eps:
        return float(np.linalg.norm(r))
    if a <= eps:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = float(d1 @ r)
        if e <= eps:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = float(d1 @ d2)
            denom = a * e - b * b
            s = min(max((b * f - c * e) / denom, 0.0), 1.0) if denom > eps else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)

    return float(np.linalg.norm((a0 + s * d1) - (b0 + t * d2)))


def segment_distance_table(points: np.ndarray, vertices: np.ndarray, edges: Sequence[Tuple[int, int]]) -> np.ndarray:
    """(n_points, n_edges) distances; with no edges, columns are the vertices"""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    vertices = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
    if len(edges) == 0:
        return cdist(points, vertices)
    return np.column_stack(
        [point_segment_distances(points, vertices[u], vertices[v]) for u, v in edges]
    )


def directed_hausdorff(vertices: np.ndarray, edges: Sequence[Tuple[int, int]], cloud) -> float:
    """Max over cloud points of the distance to the nearest edge of a straight-line graph"""
    cloud = np.atleast_2d(np.asarray(cloud, dtype=np.float64))
    if cloud.shape[0] == 0:
        raise InvalidArgumentError("Cloud must not be empty", field="cloud")
    vertices = np.atleast_2d(np.asarray(vertices, dtype=np.float64))
    if vertices.shape[0] == 0:
        raise InvalidArgumentError("Graph must have at least one vertex", field="vertices")
    return float(segment_distance_table(cloud, vertices, list(edges)).min(axis=1).max())


def ceil_log2(value: float) -> int:
    """Exact ceil(log2(value)) for positive finite floats"""
    if not (value > 0.0 and math.isfinite(value)):
        raise InvalidArgumentError("ceil_log2 needs a positive finite value", field="value", value=value)
    mantissa, exponent = math.frexp(value)
    return exponent - 1 if mantissa == 0.5 else exponent


def power_of_two(level: int) -> float:
    return math.ldexp(1.0, int(level))
