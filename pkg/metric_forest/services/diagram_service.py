"""
Diagram service - mergegrams, PD0 and bottleneck distance.
"""

import logging

from metric_forest.mergegram import Diagram, bottleneck, diagram_of_space
from metric_forest.metric_core import MetricSpaceView

logger = logging.getLogger(__name__)

HALF_SCALE = 0.5


class DiagramService:
    """Service for persistence-style invariants of a space"""

    def diagram(self, space: MetricSpaceView, pd0: bool = False, half_scale: bool = False) -> Diagram:
        """Mergegram (or PD0) of a space; ``half_scale`` halves every scale"""
        kind = "pd0" if pd0 else "mergegram"
        diagram = diagram_of_space(space, kind, HALF_SCALE if half_scale else 1.0)
        logger.info(f"{kind} of n={space.n}: {len(diagram)} pairs")
        return diagram

    def bottleneck(self, a: Diagram, b: Diagram) -> float:
        distance = bottleneck(a, b)
        logger.info(f"Bottleneck distance between {len(a)} and {len(b)} pairs: {distance}")
        return distance
