"""
Diagram commands - ``mergegram``, ``pd0`` and ``bottleneck``.
"""

import logging

from metric_forest.commands import add_input_arguments, load_input
from metric_forest.error_handlers import with_error_handling
from metric_forest.io import format_float, read_diagram, write_diagram
from metric_forest.logging_config import PerformanceLogger
from metric_forest.services.diagram_service import DiagramService

logger = logging.getLogger(__name__)


def _diagram(args, pd0: bool) -> int:
    with PerformanceLogger(logger, "PD0" if pd0 else "Mergegram") as timer:
        space = load_input(args)
        timer.note(n=space.n)
        diagram = DiagramService().diagram(space, pd0=pd0, half_scale=args.half_scale)
        write_diagram(diagram, args.out)
    return 0


@with_error_handling
def mergegram_command(args) -> int:
    """CSV of (birth, death) pairs, "inf" for the infinite death"""
    return _diagram(args, pd0=args.pd0)


@with_error_handling
def pd0_command(args) -> int:
    return _diagram(args, pd0=True)


@with_error_handling
def bottleneck_command(args) -> int:
    """Single scalar on standard output"""
    a = read_diagram(args.a, args.header)
    b = read_diagram(args.b, args.header)
    distance = DiagramService().bottleneck(a, b)
    print(format_float(distance))
    return 0


def register(subparsers) -> None:
    mergegram = subparsers.add_parser("mergegram", help="mergegram of the single-linkage dendrogram")
    add_input_arguments(mergegram)
    mergegram.add_argument("--pd0", action="store_true", help="write the 0D persistence diagram instead")
    mergegram.add_argument("--half-scale", action="store_true", help="halve every scale")
    mergegram.add_argument("--out", help="output CSV path (default: standard output)")
    mergegram.set_defaults(handler=mergegram_command)

    pd0 = subparsers.add_parser("pd0", help="0D persistence diagram from MST edge lengths")
    add_input_arguments(pd0)
    pd0.add_argument("--half-scale", action="store_true", help="halve every scale")
    pd0.add_argument("--out", help="output CSV path (default: standard output)")
    pd0.set_defaults(handler=pd0_command)

    bottleneck = subparsers.add_parser("bottleneck", help="bottleneck distance between two diagram CSVs")
    bottleneck.add_argument("--a", required=True, help="first diagram CSV")
    bottleneck.add_argument("--b", required=True, help="second diagram CSV")
    bottleneck.add_argument("--header", action="store_true")
    bottleneck.set_defaults(handler=bottleneck_command)
