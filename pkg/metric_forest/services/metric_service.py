"""
Metric service - statistics and invariant verification of input spaces.
"""

import logging
from typing import Any, Dict, Optional

from metric_forest.cover_tree import verify_tree
from metric_forest.exceptions import InvariantViolationError, MetricViolationError
from metric_forest.metric_core import MetricSpaceView, metric_stats, verify_metric_axioms
from metric_forest.models import MetricStats
from metric_forest.services import build_index

logger = logging.getLogger(__name__)


class MetricService:
    """Service for metric-space statistics and verification"""

    def stats(self, space: MetricSpaceView) -> MetricStats:
        """n, d_min, diameter, aspect ratio and expansion constant of a space"""
        stats = metric_stats(space)
        logger.info(f"Metric stats for n={stats.n}: aspect ratio {stats.aspect_ratio:.6g}")
        return stats

    def verify(self, space: MetricSpaceView, insertion_seed: Optional[int] = None) -> Dict[str, Any]:
        """
        Check the metric axioms, then build a cover tree and check its invariants.

        Raises:
            MetricViolationError: the input is not a metric (data error)
            InvariantViolationError: the built tree breaks an invariant
        """
        axioms = verify_metric_axioms(space)
        if not axioms.ok:
            failed = [
                name
                for name, ok in (
                    ("symmetry", axioms.symmetry_ok),
                    ("identity", axioms.identity_ok),
                    ("triangle", axioms.triangle_ok),
                )
                if not ok
            ]
            raise MetricViolationError(
                failed[0],
                f"Metric axioms violated: {', '.join(failed)}",
                worst_violation=axioms.worst_violation,
            )

        tree = build_index(space, insertion_seed)
        report = verify_tree(tree)
        if not report.ok:
            raise InvariantViolationError("cover-tree", "Cover tree invariants failed", details=report.model_dump())

        logger.info(f"Verified metric and cover tree on n={space.n}")
        return {"axioms": axioms.model_dump(), "cover_tree": report.model_dump()}
