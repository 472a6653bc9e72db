"""
Dataset command - ``gen``.
"""

import json
import logging
from typing import Any, Dict, List, Optional

from metric_forest.error_handlers import with_error_handling
from metric_forest.exceptions import InvalidArgumentError
from metric_forest.io import write_rows, write_tree
from metric_forest.logging_config import PerformanceLogger
from metric_forest.metric_core import EUCLIDEAN
from metric_forest.services.dataset_service import DatasetService

logger = logging.getLogger(__name__)

FAMILIES = ("line_cloud", "star", "sensible_tree", "eps_sample", "two_separated_sets", "uniform", "tube")


def parse_params(items: Optional[List[str]]) -> Dict[str, Any]:
    """key=value pairs; values are read as JSON when possible, else kept as strings"""
    params: Dict[str, Any] = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise InvalidArgumentError(f"Parameter '{item}' must look like key=value", field="param", value=item)
        try:
            params[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            params[key.strip()] = raw
    return params


@with_error_handling
def gen_command(args) -> int:
    """
    Point clouds and distance matrices go to --out. Tree families write their
    vertices to --out and edges to --edges-out; eps_sample writes its ground
    truth tree to --vertices-out / --edges-out.
    """
    with PerformanceLogger(logger, f"Generate {args.family}"):
        dataset = DatasetService().generate(args.family, parse_params(args.param), seed=args.gen_seed)
        if dataset.space is not None:
            space = dataset.space
            rows = space.points if space.kind == EUCLIDEAN else space.matrix
            write_rows(rows.tolist(), args.out)
            if dataset.tree is not None:
                write_tree(dataset.tree, args.vertices_out, args.edges_out)
        else:
            write_rows(dataset.tree.vertices.tolist(), args.out)
            write_tree(dataset.tree, None, args.edges_out)
    return 0


def register(subparsers) -> None:
    gen = subparsers.add_parser("gen", help="seeded dataset generation")
    gen.add_argument("--family", choices=FAMILIES, required=True)
    gen.add_argument("--param", action="append", help="generator parameter key=value (repeatable)")
    gen.add_argument("--seed", dest="gen_seed", type=int, help="generator seed (default: global seed)")
    gen.add_argument("--out", help="points, matrix or vertices CSV path (default: standard output)")
    gen.add_argument("--vertices-out", help="ground-truth vertices CSV (eps_sample)")
    gen.add_argument("--edges-out", help="edges CSV path")
    gen.set_defaults(handler=gen_command)
