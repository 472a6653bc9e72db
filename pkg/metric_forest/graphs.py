"""
Graph containers: weighted neighborhood graphs and straight-line trees.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix

from metric_forest.exceptions import InvalidArgumentError
from metric_forest.metric_core import directed_hausdorff

logger = logging.getLogger(__name__)


class WeightedGraph:
    """Undirected graph with positive edge lengths and optional vertex positions"""

    def __init__(self, nodes: Iterable[Hashable] = (), positions: Optional[np.ndarray] = None):
        self.nx = nx.Graph()
        self.nx.add_nodes_from(nodes)
        self.positions = None if positions is None else np.asarray(positions, dtype=np.float64)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Tuple[int, int, float]],
        positions: Optional[np.ndarray] = None,
    ) -> "WeightedGraph":
        graph = cls(range(n), positions=positions)
        for a, b, length in edges:
            graph.add_edge(a, b, length)
        return graph

    def add_edge(self, a: Hashable, b: Hashable, length: float) -> None:
        """Add an edge; a repeated edge keeps its shorter length"""
        if a == b:
            raise InvalidArgumentError(f"Self-loop at vertex {a}", field="edge", value=a)
        length = float(length)
        if not (length > 0.0 and math.isfinite(length)):
            raise InvalidArgumentError(
                f"Edge ({a}, {b}) must have a positive finite length", field="length", value=length
            )
        if self.nx.has_edge(a, b) and self.nx[a][b]["length"] <= length:
            return
        self.nx.add_edge(a, b, length=length)

    @property
    def attrs(self) -> Dict:
        return self.nx.graph

    @property
    def nodes(self) -> List[Hashable]:
        return list(self.nx.nodes)

    def number_of_nodes(self) -> int:
        return self.nx.number_of_nodes()

    def number_of_edges(self) -> int:
        return self.nx.number_of_edges()

    def edges(self) -> List[Tuple[Hashable, Hashable, float]]:
        """Edge list with each pair ordered and the list sorted"""
        out = []
        for a, b, data in self.nx.edges(data=True):
            if b < a:
                a, b = b, a
            out.append((a, b, data["length"]))
        return sorted(out)

    def neighbors(self, v: Hashable) -> Iterable[Tuple[Hashable, float]]:
        for u, data in self.nx[v].items():
            yield u, data["length"]

    def length(self, a: Hashable, b: Hashable) -> float:
        return self.nx[a][b]["length"]

    def l_max(self) -> float:
        lengths = [data["length"] for _, _, data in self.nx.edges(data=True)]
        return max(lengths) if lengths else 0.0

    def is_connected(self) -> bool:
        return self.number_of_nodes() > 0 and nx.is_connected(self.nx)

    def component_count(self) -> int:
        return nx.number_connected_components(self.nx)

    def degrees(self) -> np.ndarray:
        return np.asarray([d for _, d in self.nx.degree()], dtype=np.int64)

    def to_csgraph(self) -> csr_matrix:
        """Sparse adjacency over integer vertices 0..n-1"""
        n = self.number_of_nodes()
        rows, cols, data = [], [], []
        for a, b, length in self.edges():
            rows.extend((a, b))
            cols.extend((b, a))
            data.extend((length, length))
        return csr_matrix((data, (rows, cols)), shape=(n, n))


@dataclass(eq=False)
class StraightLineTree:
    """Tree embedded in R^m with straight segments as edges"""

    vertices: np.ndarray
    edges: List[Tuple[int, int]]
    labels: Optional[np.ndarray] = None
    weights: Optional[List[float]] = None
    _graph: nx.Graph = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=np.float64))
        self.edges = [(int(min(a, b)), int(max(a, b))) for a, b in self.edges]
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)

        if self.vertices.shape[0] == 0:
            raise InvalidArgumentError("A tree needs at least one vertex", field="vertices")
        graph = nx.Graph()
        graph.add_nodes_from(range(self.vertices.shape[0]))
        graph.add_edges_from(self.edges)
        if graph.number_of_nodes() != self.vertices.shape[0] or not nx.is_tree(graph):
            raise InvalidArgumentError("Edges must form a tree over all vertices", field="edges")
        self._graph = graph

    @property
    def graph(self) -> nx.Graph:
        return self._graph

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def segments(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2, self.vertices.shape[1]))
        idx = np.asarray(self.edges, dtype=np.int64)
        return np.stack([self.vertices[idx[:, 0]], self.vertices[idx[:, 1]]], axis=1)

    @property
    def edge_lengths(self) -> np.ndarray:
        seg = self.segments
        return np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)

    @property
    def l_max(self) -> float:
        lengths = self.edge_lengths
        return float(lengths.max()) if lengths.size else 0.0

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray([self._graph.degree(v) for v in range(self.n_vertices)], dtype=np.int64)

    @property
    def theta(self) -> float:
        """Smallest angle between two edges sharing a vertex; pi when no edges are adjacent"""
        best = math.pi
        for v in range(self.n_vertices):
            nbrs = list(self._graph.neighbors(v))
            if len(nbrs) < 2:
                continue
            vectors = self.vertices[nbrs] - self.vertices[v]
            vectors = vectors / np.linalg.norm(vectors, axis=1)[:, None]
            cosines = np.clip(vectors @ vectors.T, -1.0, 1.0)
            np.fill_diagonal(cosines, -1.0)
            best = min(best, float(np.arccos(cosines.max())))
        return best

    def incident_edges(self, v: int) -> List[int]:
        return [e for e, (a, b) in enumerate(self.edges) if a == v or b == v]

    def directed_hausdorff(self, cloud) -> float:
        return directed_hausdorff(self.vertices, self.edges, cloud)

    def with_vertices(self, vertices: np.ndarray) -> "StraightLineTree":
        return StraightLineTree(
            vertices=np.array(vertices, dtype=np.float64),
            edges=list(self.edges),
            labels=None if self.labels is None else self.labels.copy(),
            weights=None if self.weights is None else list(self.weights),
        )

    @classmethod
    def single_vertex(cls, point: Sequence[float], label: Optional[int] = None) -> "StraightLineTree":
        return cls(
            vertices=np.asarray([point], dtype=np.float64),
            edges=[],
            labels=None if label is None else np.asarray([label]),
        )
