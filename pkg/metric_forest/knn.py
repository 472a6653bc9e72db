"""
k-nearest-neighbor search over a compressed cover tree.

The exact search keeps a candidate set R (initially the root) and walks the
distinct child levels top-down. At level j the candidates and their level-j
children form C; every point of a distinctive descendant set S_j(c) lies
within 2^(j+1) of c. Sorting C by distance and taking lambda_k (the first
candidate whose prefix of |S_j| sizes reaches k) gives an upper bound on the
k-th neighbor distance, and candidates beyond that bound plus 2^(j+2) are
dropped.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from metric_forest.config import settings
from metric_forest.cover_tree import CompressedCoverTree
from metric_forest.exceptions import (
    EmptyStructureError,
    InvalidArgumentError,
    InvariantViolationError,
)
from metric_forest.metric_core import MetricSpaceView, Query, power_of_two
from metric_forest.validators import validate_integer, validate_positive_float

logger = logging.getLogger(__name__)


@dataclass
class KnnResult:
    """Neighbors of one query, sorted by (distance, id)"""

    query: Query
    ids: np.ndarray
    distances: np.ndarray

    @property
    def neighbors(self) -> List[Tuple[int, float]]:
        return [(int(i), float(d)) for i, d in zip(self.ids, self.distances)]

    @property
    def kth_distance(self) -> float:
        return float(self.distances[-1])

    def __len__(self) -> int:
        return int(self.ids.shape[0])


def _order(ids: np.ndarray, dists: np.ndarray) -> np.ndarray:
    """Indices sorting by distance, then id"""
    return np.lexsort((ids, dists))


def _lambda_index(sorted_sizes: Sequence[int], k: int) -> int:
    prefix = np.cumsum(sorted_sizes)
    reached = np.flatnonzero(prefix >= k)
    return int(reached[0]) if reached.size else len(prefix) - 1


def lambda_k(candidates: Sequence[int], distances: Sequence[float], sizes: Sequence[int], k: int) -> int:
    """
    Candidate whose distance bounds the k-th nearest neighbor.

    Candidates are ordered by (distance, id); the result is the first one at
    which the running total of descendant-set sizes reaches k, or the last
    candidate when the total never does.
    """
    if len(candidates) == 0:
        raise InvalidArgumentError("lambda_k needs at least one candidate", field="candidates")
    k = validate_integer(k, "k", min_value=1)
    ids = np.asarray(candidates, dtype=np.int64)
    order = _order(ids, np.asarray(distances, dtype=np.float64))
    sizes = np.asarray(sizes, dtype=np.int64)[order]
    return int(ids[order][_lambda_index(sizes, k)])


def knn_bruteforce(space: MetricSpaceView, q: Query, k: int) -> KnnResult:
    k = validate_integer(k, "k", min_value=1)
    if space.n == 0:
        raise EmptyStructureError("Reference set")
    ids = np.arange(space.n, dtype=np.int64)
    dists = space.query_distances(q, ids)
    order = _order(ids, dists)[: min(k, space.n)]
    return KnnResult(query=q, ids=ids[order], distances=dists[order])


class _Descent:
    """Shared level-by-level descent state for one query"""

    def __init__(self, tree: CompressedCoverTree, q: Query):
        self.tree = tree
        self.q = q
        root = tree.root
        self.R = np.asarray([root], dtype=np.int64)
        self.dist = tree.space.query_distances(q, self.R)
        self.i = tree.l_max + 1

    def expand(self) -> Optional[int]:
        """Add the children at the next level; returns that level or None"""
        tree = self.tree
        j = None
        for r in self.R:
            lvl = tree.next_level(int(r), self.i - 1)
            if lvl is not None and (j is None or lvl > j):
                j = lvl
        if j is None:
            return None

        new = [c for r in self.R for c in tree.children_at(int(r), j)]
        if new:
            new_ids = np.asarray(new, dtype=np.int64)
            self.R = np.concatenate([self.R, new_ids])
            self.dist = np.concatenate([self.dist, tree.space.query_distances(self.q, new_ids)])
        self.i = j
        return j

    def sorted_view(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        order = _order(self.R, self.dist)
        ids = self.R[order]
        sizes = np.asarray([self.tree.distinctive_size(int(c), self.i) for c in ids], dtype=np.int64)
        return ids, self.dist[order], sizes

    def keep(self, mask: np.ndarray, ids: np.ndarray, dists: np.ndarray) -> None:
        self.R = ids[mask]
        self.dist = dists[mask]

    def covered(self) -> np.ndarray:
        return np.concatenate(
            [self.tree.distinctive_descendants(int(r), self.i) for r in self.R]
        )


def _check_containment(descent: _Descent, truth: np.ndarray) -> None:
    missing = np.setdiff1d(truth, descent.covered())
    if missing.size:
        raise InvariantViolationError(
            "knn-containment",
            f"true neighbors {missing.tolist()} fell outside the candidate sets at level {descent.i}",
        )


def knn_exact(
    tree: CompressedCoverTree, q: Query, k: int, assert_mode: Optional[bool] = None
) -> KnnResult:
    k = validate_integer(k, "k", min_value=1)
    if tree.n == 0:
        raise EmptyStructureError("Cover tree")
    assert_mode = settings.assert_mode if assert_mode is None else assert_mode
    kk = min(k, tree.n)
    tol = settings.distance_tolerance

    truth = knn_bruteforce(tree.space, q, kk).ids if assert_mode else None
    descent = _Descent(tree, q)
    while True:
        j = descent.expand()
        if j is None:
            break
        ids, dists, sizes = descent.sorted_view()
        t = _lambda_index(sizes, kk)
        bound = dists[t] + power_of_two(j + 2)
        descent.keep(dists <= bound + tol * (1.0 + bound), ids, dists)
        if assert_mode:
            _check_containment(descent, truth)

    order = _order(descent.R, descent.dist)[:kk]
    return KnnResult(query=q, ids=descent.R[order], distances=descent.dist[order])


def knn_approx(
    tree: CompressedCoverTree,
    q: Query,
    k: int,
    epsilon: float,
    assert_mode: Optional[bool] = None,
) -> KnnResult:
    """
    (1+epsilon)-approximate k nearest neighbors.

    The descent stops at the first level j where 2^(j+1)(2+epsilon) <=
    epsilon * a, with a the distance to the nearest candidate. Every true
    neighbor is then at least a - 2^(j+1) away, and the points of the
    nearest candidates' descendant sets are at most 2^(j+2) farther than
    the true neighbor of the same rank.
    """
    k = validate_integer(k, "k", min_value=1)
    epsilon = validate_positive_float(epsilon, "epsilon")
    if tree.n == 0:
        raise EmptyStructureError("Cover tree")
    assert_mode = settings.assert_mode if assert_mode is None else assert_mode
    kk = min(k, tree.n)
    tol = settings.distance_tolerance
    space = tree.space

    truth = knn_bruteforce(space, q, kk).ids if assert_mode else None
    descent = _Descent(tree, q)
    while True:
        j = descent.expand()
        if j is None:
            break
        ids, dists, sizes = descent.sorted_view()
        rho = power_of_two(j + 1)
        if rho * (2.0 + epsilon) <= epsilon * dists[0]:
            t = _lambda_index(sizes, kk)
            pool = np.unique(
                np.concatenate([tree.distinctive_descendants(int(c), j) for c in ids[: t + 1]])
            )
            pool_dists = space.query_distances(q, pool)
            order = _order(pool, pool_dists)[:kk]
            logger.debug(f"Approximate search stopped at level {j} with {pool.size} points")
            return KnnResult(query=q, ids=pool[order], distances=pool_dists[order])

        t = _lambda_index(sizes, kk)
        bound = dists[t] + 2.0 * rho
        descent.keep(dists <= bound + tol * (1.0 + bound), ids, dists)
        if assert_mode:
            _check_containment(descent, truth)

    order = _order(descent.R, descent.dist)[:kk]
    return KnnResult(query=q, ids=descent.R[order], distances=descent.dist[order])


def knn_batch(
    tree: CompressedCoverTree,
    queries: Sequence[Query],
    k: int,
    epsilon: Optional[float] = None,
    threads: Optional[int] = None,
) -> List[KnnResult]:
    """Independent queries; results come back in query order"""
    threads = settings.threads if threads is None else validate_integer(threads, "threads", min_value=1)

    def search(q):
        if epsilon is None:
            return knn_exact(tree, q, k)
        return knn_approx(tree, q, k, epsilon)

    if threads == 1 or len(queries) < 2:
        return [search(q) for q in queries]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(search, queries))


def all_nearest_neighbors(
    tree: CompressedCoverTree, k: int, threads: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    The k nearest other points of every reference point.

    Returns (ids, distances), both of shape (n, min(k, n-1)).
    """
    k = validate_integer(k, "k", min_value=1)
    n = tree.n
    kk = min(k, n - 1)
    if kk == 0:
        return np.zeros((n, 0), dtype=np.int64), np.zeros((n, 0))

    results = knn_batch(tree, list(range(n)), kk + 1, threads=threads)
    ids = np.zeros((n, kk), dtype=np.int64)
    dists = np.zeros((n, kk))
    for p, result in enumerate(results):
        others = result.ids != p
        ids[p] = result.ids[others][:kk]
        dists[p] = result.distances[others][:kk]
    return ids, dists
