"""Services package initialization"""

from typing import Optional

import numpy as np

from metric_forest.cover_tree import CompressedCoverTree, build
from metric_forest.metric_core import MetricSpaceView


def build_index(space: MetricSpaceView, insertion_seed: Optional[int] = None) -> CompressedCoverTree:
    """Cover tree in input order, or in a seeded shuffled order"""
    if insertion_seed is None:
        return build(space)
    order = np.random.default_rng(insertion_seed).permutation(space.n)
    return build(space, insertion_order=order)


__all__ = ["build_index"]
