"""
metric-forest: exact geometry of finite metric spaces.

Compressed cover trees with k-nearest-neighbor search and single-tree Borůvka
minimum spanning trees, and the invariants built on MSTs: single-linkage
dendrograms, mergegrams, 0D persistence, bottleneck distance, sigmoid kernel
density estimation and skeletonization of noisy point clouds.
"""

from metric_forest.boruvka_mst import PartitionForest, SpanningTree, mst_oracle_prim, mst_singletree_boruvka
from metric_forest.config import settings
from metric_forest.cover_tree import CompressedCoverTree, build, verify_tree
from metric_forest.graphs import StraightLineTree, WeightedGraph
from metric_forest.kde import fit_sigmoid, kde_approx, kde_exact
from metric_forest.knn import knn_approx, knn_bruteforce, knn_exact
from metric_forest.mergegram import Diagram, bottleneck, mergegram, pd0, sl_dendrogram
from metric_forest.metric_core import MetricSpaceView, verify_metric_axioms

__version__ = settings.app_version

__all__ = [
    "CompressedCoverTree",
    "Diagram",
    "MetricSpaceView",
    "PartitionForest",
    "SpanningTree",
    "StraightLineTree",
    "WeightedGraph",
    "bottleneck",
    "build",
    "fit_sigmoid",
    "kde_approx",
    "kde_exact",
    "knn_approx",
    "knn_bruteforce",
    "knn_exact",
    "mergegram",
    "mst_oracle_prim",
    "mst_singletree_boruvka",
    "pd0",
    "settings",
    "sl_dendrogram",
    "verify_metric_axioms",
    "verify_tree",
]
