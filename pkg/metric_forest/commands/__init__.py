"""
Command modules.

Each module exposes ``register(subparsers)`` adding its subcommands; the
handler of a subcommand is stored as the parser default ``handler``.
"""

import argparse
from typing import List, Optional

import numpy as np

from metric_forest.exceptions import InvalidArgumentError
from metric_forest.io import load_space, read_points
from metric_forest.metric_core import EUCLIDEAN, MetricSpaceView
from metric_forest.validators import validate_id_set


def add_input_arguments(parser: argparse.ArgumentParser, point_flag: str = "--input") -> None:
    """Point-cloud or matrix input, with the header, dedup and insertion-order options"""
    parser.add_argument(point_flag, dest="input", help="point cloud CSV, one point per row")
    parser.add_argument("--matrix", help="distance matrix CSV (n rows of n values)")
    parser.add_argument("--header", action="store_true", help="input files start with a header row")
    parser.add_argument("--dedup", action="store_true", help="drop repeated points before indexing")
    parser.add_argument("--insertion-seed", type=int, help="seeded shuffle of the cover tree insertion order")


def add_query_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--query", help="query points CSV (Euclidean references only)")
    parser.add_argument("--query-ids", help="comma-separated reference ids used as queries")


def load_input(args: argparse.Namespace, validate: bool = True) -> MetricSpaceView:
    return load_space(args.input, args.matrix, header=args.header, dedup=args.dedup, validate=validate)


def parse_ids(value: str, n: int, field_name: str) -> List[int]:
    parts = [part.strip() for part in value.split(",") if part.strip()]
    try:
        ids = [int(part) for part in parts]
    except ValueError:
        raise InvalidArgumentError(f"Field '{field_name}' must list integer ids", field=field_name, value=value)
    return validate_id_set(ids, n, field_name)


def load_queries(args: argparse.Namespace, reference: MetricSpaceView):
    """
    Queries from --query (coordinates) or --query-ids (reference ids).
    Without either, every reference point is a query.
    """
    query_path: Optional[str] = args.query
    if query_path is not None and args.query_ids is not None:
        raise InvalidArgumentError("Give either --query or --query-ids", field="query")
    if query_path is not None:
        if reference.kind != EUCLIDEAN:
            raise InvalidArgumentError("Coordinate queries need a Euclidean reference", field="query")
        return np.asarray(read_points(query_path, args.header), dtype=np.float64)
    if args.query_ids is not None:
        return parse_ids(args.query_ids, reference.n, "query_ids")
    return list(range(reference.n))
