"""
Sigmoid-kernel density estimation.

K(x) = 1 / (1 + exp(p (x - r))) with p = 2 ln(99) / t, so that K drops from
0.99 to 0.01 across [r - t/2, r + t/2]. The density of a query is the sum of
K over its distances to the reference points. The approximate evaluator walks
the reference cover tree and replaces a whole subtree by its size times K at
the middle of the subtree's distance interval whenever K varies by less than
epsilon over that interval.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from metric_forest.config import settings
from metric_forest.cover_tree import CompressedCoverTree
from metric_forest.exceptions import EmptyStructureError
from metric_forest.metric_core import EUCLIDEAN, MetricSpaceView
from metric_forest.validators import validate_integer, validate_positive_float

logger = logging.getLogger(__name__)

EXPONENT_CLAMP = 700.0
LN_99 = math.log(99.0)

Queries = Union[np.ndarray, Sequence[int]]


@dataclass(frozen=True)
class SigmoidKernel:
    r: float
    t: float
    p: float
    q: float

    def __call__(self, x):
        return sigmoid(self, x)


@dataclass
class KdeResult:
    values: np.ndarray
    mode: str
    epsilon: Optional[float] = None
    prunes: int = 0
    leaves: int = 0

    def __len__(self) -> int:
        return int(self.values.shape[0])


def fit_sigmoid(r: float, t: float) -> SigmoidKernel:
    r = validate_positive_float(r, "r")
    t = validate_positive_float(t, "t")
    p = 2.0 * LN_99 / t
    return SigmoidKernel(r=r, t=t, p=p, q=-p * r)


def sigmoid(kernel: SigmoidKernel, x):
    """Vectorized kernel value with the exponent clamped to avoid overflow"""
    x = np.asarray(x, dtype=np.float64)
    exponent = np.clip(kernel.p * (x - kernel.r), -EXPONENT_CLAMP, EXPONENT_CLAMP)
    values = 1.0 / (1.0 + np.exp(exponent))
    return float(values) if values.ndim == 0 else values


def _query_list(space: MetricSpaceView, queries: Queries) -> list:
    """Normalize queries to a list of point ids or coordinate rows"""
    if isinstance(queries, np.ndarray) and queries.dtype.kind == "f":
        return list(np.atleast_2d(queries))
    return [int(q) for q in queries]


def kde_exact(kernel: SigmoidKernel, space: MetricSpaceView, queries: Queries, block_rows: int = 512) -> KdeResult:
    """Brute-force density of each query against every point of ``space``"""
    if space.n == 0:
        raise EmptyStructureError("Reference set")
    query_list = _query_list(space, queries)
    values = np.zeros(len(query_list))
    all_ids = np.arange(space.n)

    if space.kind == EUCLIDEAN and query_list and not isinstance(query_list[0], int):
        Q = np.asarray(query_list, dtype=np.float64)
        for start in range(0, Q.shape[0], block_rows):
            block = cdist(Q[start : start + block_rows], space.points)
            values[start : start + block_rows] = sigmoid(kernel, block).sum(axis=1)
    else:
        for idx, q in enumerate(query_list):
            values[idx] = float(np.sum(sigmoid(kernel, space.query_distances(q, all_ids))))

    return KdeResult(values=values, mode="exact")


def _approx_one(kernel: SigmoidKernel, tree: CompressedCoverTree, q, epsilon: float) -> Tuple[float, int, int]:
    space = tree.space
    total = 0.0
    prunes = 0
    leaves = 0
    frontier = np.asarray([tree.root], dtype=np.int64)
    while frontier.size:
        d = space.query_distances(q, frontier)
        sizes = tree.subtree_size[frontier]
        radius = np.ldexp(1.0, (tree.level[frontier] + 1).astype(np.int64))
        near = np.maximum(d - radius, 0.0)
        far = d + radius
        gap = sigmoid(kernel, near) - sigmoid(kernel, far)

        prune = (sizes > 1) & (gap < epsilon)
        if prune.any():
            mid = 0.5 * (near[prune] + far[prune])
            total += float(np.sum(sizes[prune] * sigmoid(kernel, mid)))
            prunes += int(prune.sum())

        open_nodes = frontier[~prune]
        total += float(np.sum(sigmoid(kernel, d[~prune])))
        leaves += int(open_nodes.size)
        kids = [tree.flat_children[int(p)] for p in open_nodes]
        frontier = np.concatenate(kids) if kids else np.zeros(0, dtype=np.int64)

    return total, prunes, leaves


def kde_approx(
    kernel: SigmoidKernel,
    tree: CompressedCoverTree,
    queries: Queries,
    epsilon: float,
    threads: Optional[int] = None,
) -> KdeResult:
    """
    Tree-pruned density with error at most epsilon per reference point.

    A node of level l has all its descendants within 2^(l+1), so their kernel
    values lie between K(d + 2^(l+1)) and K(max(d - 2^(l+1), 0)).
    """
    epsilon = validate_positive_float(epsilon, "epsilon")
    threads = settings.threads if threads is None else validate_integer(threads, "threads", min_value=1)
    if tree.n == 0:
        raise EmptyStructureError("Cover tree")
    query_list = _query_list(tree.space, queries)

    def evaluate(q):
        return _approx_one(kernel, tree, q, epsilon)

    if threads == 1 or len(query_list) < 2:
        outcomes = [evaluate(q) for q in query_list]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(evaluate, query_list))

    values = np.asarray([o[0] for o in outcomes], dtype=np.float64)
    prunes = sum(o[1] for o in outcomes)
    leaves = sum(o[2] for o in outcomes)
    logger.debug(f"Approximate KDE: {len(query_list)} queries, {prunes} prunes, {leaves} exact terms")
    return KdeResult(values=values, mode="approx", epsilon=epsilon, prunes=prunes, leaves=leaves)


def densest_point(kernel: SigmoidKernel, space: MetricSpaceView) -> Tuple[int, float]:
    """Reference point with the largest density over the cloud itself; lowest id on ties"""
    values = kde_exact(kernel, space, list(range(space.n))).values
    best = int(np.argmax(values))
    return best, float(values[best])
