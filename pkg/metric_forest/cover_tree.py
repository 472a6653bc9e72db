"""
Compressed cover trees.

One node per point, an integer level per node, a parent link and children
grouped by level. The tree satisfies

    covering:   l(p) < l(parent(p)) and d(p, parent(p)) <= 2^(l(p)+1)
    separation: points with level >= i are pairwise more than 2^i apart

and exposes the structural queries (Next, distinctive descendant sets and
their sizes) that k-NN search, Borůvka MST and KDE pruning consume.
"""

import bisect
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from metric_forest.config import settings
from metric_forest.exceptions import (
    DataError,
    DuplicatePointError,
    EmptyStructureError,
    InvalidArgumentError,
)
from metric_forest.metric_core import EXPLICIT, MetricSpaceView, ceil_log2, power_of_two
from metric_forest.models import TreeReport
from metric_forest.validators import validate_point_id

logger = logging.getLogger(__name__)


class CompressedCoverTree:
    """Leveled tree over a metric space; built by :func:`build`"""

    def __init__(
        self,
        space: MetricSpaceView,
        root: int,
        level: np.ndarray,
        parent: np.ndarray,
        children: List[Dict[int, List[int]]],
    ):
        self.space = space
        self.root = int(root)
        self.level = level
        self.parent = parent
        self.children = children
        self.reindex()

    def reindex(self) -> None:
        """Rebuild the per-node caches from level/parent/children"""
        n = self.n
        self.child_levels: List[List[int]] = [sorted(groups) for groups in self.children]

        self.subtree_size = np.ones(n, dtype=np.int64)
        for p in np.argsort(self.level, kind="stable"):
            q = self.parent[p]
            if q >= 0:
                self.subtree_size[q] += self.subtree_size[p]

        # prefix[p][g] = total size of child groups strictly before group g
        self.prefix: List[List[int]] = []
        self.flat_children: List[np.ndarray] = []
        for p in range(n):
            sums = [0]
            flat: List[int] = []
            for lvl in self.child_levels[p]:
                group = self.children[p][lvl]
                sums.append(sums[-1] + int(self.subtree_size[group].sum()))
                flat.extend(group)
            self.prefix.append(sums)
            self.flat_children.append(np.asarray(flat, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.level.shape[0])

    @property
    def l_max(self) -> int:
        return int(self.level[self.root])

    @property
    def l_min(self) -> int:
        return int(self.level.min())

    def __repr__(self) -> str:
        return f"CompressedCoverTree(n={self.n}, l_max={self.l_max}, l_min={self.l_min})"

    def children_at(self, p: int, lvl: int) -> List[int]:
        return self.children[p].get(lvl, [])

    def child_groups(self, p: int) -> List[Tuple[int, List[int]]]:
        return [(lvl, self.children[p][lvl]) for lvl in self.child_levels[p]]

    def next_level(self, p: int, i: int) -> Optional[int]:
        """Largest child level of p that is <= i, or None"""
        levels = self.child_levels[p]
        idx = bisect.bisect_right(levels, i)
        return levels[idx - 1] if idx else None

    def distinctive_size(self, p: int, i: int) -> int:
        """|S_i(p)|: p plus the subtrees of children with level <= i-1"""
        idx = bisect.bisect_right(self.child_levels[p], i - 1)
        return 1 + self.prefix[p][idx]

    def group_index(self, p: int, i: int) -> int:
        """Number of child groups of p that belong to S_i(p)"""
        return bisect.bisect_right(self.child_levels[p], i - 1)

    def descendants(self, p: int) -> np.ndarray:
        out = [p]
        stack = [p]
        while stack:
            q = stack.pop()
            kids = self.flat_children[q]
            out.extend(kids.tolist())
            stack.extend(kids.tolist())
        return np.sort(np.asarray(out, dtype=np.int64))

    def distinctive_descendants(self, p: int, i: int) -> np.ndarray:
        if i > self.level[p] + 1:
            raise InvalidArgumentError(
                f"Distinctive descendants of {p} need i <= l(p)+1 = {self.level[p] + 1}",
                field="i",
                value=i,
            )
        out = [np.asarray([p], dtype=np.int64)]
        for lvl in self.child_levels[p]:
            if lvl > i - 1:
                break
            for c in self.children[p][lvl]:
                out.append(self.descendants(c))
        return np.sort(np.concatenate(out))


# ----------------------------------------------------------------------
# construction


def _max_child_level(children: Dict[int, List[int]], limit: int) -> Optional[int]:
    best = None
    for lvl in children:
        if lvl <= limit and (best is None or lvl > best):
            best = lvl
    return best


def _check_symmetric(space: MetricSpaceView, p: int, ids: np.ndarray, forward: np.ndarray, tol: float) -> None:
    backward = space.matrix[ids, p]
    if ids.size and float(np.max(np.abs(forward - backward))) > tol:
        raise InvalidArgumentError(
            f"Distance matrix is not symmetric around point {p}", field="matrix"
        )


def build(
    space: MetricSpaceView, insertion_order: Optional[Sequence[int]] = None
) -> CompressedCoverTree:
    """
    Insert points one by one into a compressed cover tree.

    Each insertion descends from the root collecting every node q that could
    constrain the new point p, then gives p the highest level that keeps the
    separation condition, i.e. one below the smallest ceil(log2 d(p, q)) over
    nodes q with d(p, q) <= 2^l(q). Its parent is the nearest such node at or
    above that level. The root level grows whenever a point lands farther
    than 2^l(root).
    """
    n = space.n
    if n == 0:
        raise EmptyStructureError("Metric space")

    if insertion_order is None:
        order = np.arange(n, dtype=np.int64)
    else:
        order = np.asarray(insertion_order, dtype=np.int64).reshape(-1)
        if order.size != n or not np.array_equal(np.sort(order), np.arange(n)):
            raise InvalidArgumentError(
                "Insertion order must be a permutation of the point ids",
                field="insertion_order",
            )

    check_symmetry = space.kind == EXPLICIT and not space.validated
    tol = settings.distance_tolerance

    level = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    children: List[Dict[int, List[int]]] = [dict() for _ in range(n)]

    root = int(order[0])
    level[root] = 0

    for p in order[1:]:
        p = int(p)
        d_root = space.distance(p, root)
        if check_symmetry:
            _check_symmetric(space, p, np.asarray([root]), np.asarray([d_root]), tol)
        if d_root == 0.0:
            raise DuplicatePointError(p, root)
        if d_root > power_of_two(level[root]):
            level[root] = ceil_log2(d_root)

        dist = {root: d_root}
        Q = [root]
        i = int(level[root])
        while Q:
            j = None
            for q in Q:
                lvl = _max_child_level(children[q], i - 1)
                if lvl is not None and (j is None or lvl > j):
                    j = lvl
            if j is None:
                break

            new = [c for q in Q for c in children[q].get(j, [])]
            ids = np.asarray(new, dtype=np.int64)
            d_new = space.distances(p, ids)
            if check_symmetry:
                _check_symmetric(space, p, ids, d_new, tol)
            for c, d in zip(new, d_new):
                if d == 0.0:
                    raise DuplicatePointError(p, c)
                dist[c] = float(d)

            # unexplored descendants sit within 2^(j+1) of their node and
            # matter only if they lie within 2^(j-1) of p
            radius = power_of_two(j + 2)
            Q = [q for q in Q + new if dist[q] <= radius]
            i = j

        best_level = None
        for q, d in dist.items():
            c = ceil_log2(d)
            if c <= level[q] and (best_level is None or c < best_level):
                best_level = c

        bound = power_of_two(best_level)
        host = min(
            (d, q) for q, d in dist.items() if d <= bound and level[q] >= best_level
        )[1]
        level[p] = best_level - 1
        parent[p] = host
        children[host].setdefault(best_level - 1, []).append(p)

    if n > 1:
        others = np.delete(level, root)
        level[root] = int(others.max()) + 1
    else:
        level[root] = 0

    tree = CompressedCoverTree(space, root, level, parent, children)
    logger.debug(
        f"Built cover tree n={n} levels=[{tree.l_min}, {tree.l_max}] "
        f"height={len(height_levels(tree))}"
    )
    return tree


# ----------------------------------------------------------------------
# structural queries


def next_level(tree: CompressedCoverTree, p: int, i: int) -> Optional[int]:
    p = validate_point_id(p, tree.n, "p")
    if i > tree.level[p]:
        raise InvalidArgumentError(
            f"next_level needs i <= l(p) = {tree.level[p]}", field="i", value=i
        )
    return tree.next_level(p, i)


def distinctive_descendants(tree: CompressedCoverTree, p: int, i: int) -> np.ndarray:
    p = validate_point_id(p, tree.n, "p")
    return tree.distinctive_descendants(p, i)


def descendants(tree: CompressedCoverTree, p: int) -> np.ndarray:
    p = validate_point_id(p, tree.n, "p")
    return tree.descendants(p)


def essential_levels(tree: CompressedCoverTree, p: int) -> List[int]:
    p = validate_point_id(p, tree.n, "p")
    return sorted(set(tree.child_levels[p]) | {int(tree.level[p])})


def height_levels(tree: CompressedCoverTree) -> List[int]:
    return sorted({int(lvl) for lvl in tree.level})


def verify_tree(tree: CompressedCoverTree, tolerance: Optional[float] = None) -> TreeReport:
    """Exhaustive check of covering, separation and the node partition"""
    tol = settings.distance_tolerance if tolerance is None else tolerance
    space = tree.space
    n = tree.n
    level = tree.level

    partition_ok = (
        n == space.n
        and len(tree.children) == n
        and tree.parent.shape[0] == n
        and 0 <= tree.root < n
        and tree.parent[tree.root] == -1
        and int(np.sum(tree.parent == -1)) == 1
    )
    if partition_ok:
        for p in range(n):
            for lvl, group in tree.children[p].items():
                if any(tree.parent[c] != p or level[c] != lvl for c in group):
                    partition_ok = False
                    break
            if not partition_ok:
                break
    if partition_ok:
        seen = np.zeros(n, dtype=bool)
        stack = [tree.root]
        while stack:
            q = stack.pop()
            if seen[q]:
                partition_ok = False
                break
            seen[q] = True
            for group in tree.children[q].values():
                stack.extend(group)
        partition_ok = partition_ok and bool(seen.all())

    covering_ok = True
    for p in range(n):
        q = int(tree.parent[p])
        if q < 0:
            continue
        if not (level[p] < level[q]) or space.distance(p, q) > power_of_two(level[p] + 1) + tol:
            covering_ok = False
            break

    separation_ok = True
    for i in sorted({int(lvl) for lvl in level}, reverse=True):
        cover = np.flatnonzero(level >= i)
        if cover.size < 2:
            continue
        block = space.cross(cover, cover)
        np.fill_diagonal(block, np.inf)
        if float(block.min()) <= power_of_two(i):
            separation_ok = False
            break

    return TreeReport(covering_ok=covering_ok, separation_ok=separation_ok, partition_ok=partition_ok)


# ----------------------------------------------------------------------
# serialization


def tree_to_dict(tree: CompressedCoverTree) -> Dict[str, Any]:
    return {
        "n": tree.n,
        "root": tree.root,
        "kind": tree.space.kind,
        "nodes": [
            {
                "id": p,
                "level": int(tree.level[p]),
                "parent": None if tree.parent[p] < 0 else int(tree.parent[p]),
                "children": {
                    str(lvl): [int(c) for c in tree.children[p][lvl]]
                    for lvl in tree.child_levels[p]
                },
            }
            for p in range(tree.n)
        ],
    }


def tree_from_dict(data: Dict[str, Any], space: MetricSpaceView) -> CompressedCoverTree:
    """Rebuild a serialized tree over ``space`` and re-verify it"""
    try:
        n = int(data["n"])
        root = int(data["root"])
        nodes = data["nodes"]
        if n != space.n or len(nodes) != n:
            raise DataError(f"Serialized tree has {n} nodes, space has {space.n} points")

        level = np.zeros(n, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int64)
        children: List[Dict[int, List[int]]] = [dict() for _ in range(n)]
        for node in nodes:
            p = int(node["id"])
            level[p] = int(node["level"])
            parent[p] = -1 if node["parent"] is None else int(node["parent"])
            children[p] = {int(lvl): [int(c) for c in group] for lvl, group in node["children"].items()}
        tree = CompressedCoverTree(space, root, level, parent, children)
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise DataError(f"Malformed cover tree document: {exc}")

    report = verify_tree(tree)
    if not (report.covering_ok and report.separation_ok and report.partition_ok):
        raise DataError("Serialized cover tree violates its invariants", details=report.model_dump())
    return tree
