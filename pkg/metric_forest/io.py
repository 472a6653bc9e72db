"""
CSV and JSON readers and writers for the command-line surface.

Floats are written with 17 significant digits so that every value read back
is bit-identical; infinity is written as the literal ``inf``.
"""

import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from metric_forest.exceptions import DataParseError, InvalidArgumentError, MissingArgumentError
from metric_forest.graphs import StraightLineTree
from metric_forest.mergegram import Diagram
from metric_forest.metric_core import MetricSpaceView, deduplicate_points

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _format_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def _read_rows(path: PathLike, header: bool = False) -> List[List[float]]:
    """Numeric rows of a CSV file; every row must have the same width"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataParseError(f"Cannot read {path}: {exc.strerror}", path=str(path))

    rows: List[List[float]] = []
    width: Optional[int] = None
    for line_no, row in enumerate(csv.reader(text.splitlines()), start=1):
        if header and line_no == 1:
            continue
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise DataParseError("Non-numeric value", path=str(path), line=line_no)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise DataParseError(
                f"Expected {width} columns, found {len(values)}", path=str(path), line=line_no
            )
        rows.append(values)

    if not rows:
        raise DataParseError("File contains no data rows", path=str(path))
    return rows


def read_points(path: PathLike, header: bool = False) -> np.ndarray:
    return np.asarray(_read_rows(path, header), dtype=np.float64)


def read_space(path: PathLike, header: bool = False) -> MetricSpaceView:
    return MetricSpaceView.from_points(read_points(path, header))


def read_matrix(path: PathLike, header: bool = False, validate: bool = True) -> MetricSpaceView:
    matrix = np.asarray(_read_rows(path, header), dtype=np.float64)
    if matrix.shape[0] != matrix.shape[1]:
        raise DataParseError(
            f"Distance matrix must be square, got {matrix.shape[0]}x{matrix.shape[1]}", path=str(path)
        )
    return MetricSpaceView.from_matrix(matrix, validate=validate)


def read_diagram(path: PathLike, header: bool = False) -> Diagram:
    rows = _read_rows(path, header)
    if len(rows[0]) != 2:
        raise DataParseError("Diagram rows must be (birth, death)", path=str(path))
    for i, (birth, death) in enumerate(rows, start=1):
        if not math.isfinite(birth) or math.isnan(death) or death < birth:
            raise DataParseError(
                f"Diagram row {i} needs a finite birth and a death no earlier than it, "
                f"got ({birth}, {death})",
                path=str(path),
            )
    return Diagram(tuple(row) for row in rows)


def read_edges(path: PathLike, header: bool = False) -> List[Tuple[int, int]]:
    rows = _read_rows(path, header)
    edges = []
    for row in rows:
        if len(row) < 2 or not (row[0].is_integer() and row[1].is_integer()):
            raise DataParseError("Edge rows must start with two integer vertex ids", path=str(path))
        edges.append((int(row[0]), int(row[1])))
    return edges


def read_tree(vertices_path: PathLike, edges_path: PathLike, header: bool = False) -> StraightLineTree:
    return StraightLineTree(vertices=read_points(vertices_path, header), edges=read_edges(edges_path, header))


def write_rows(
    rows: Iterable[Sequence[Any]],
    path: Optional[PathLike] = None,
    header: Optional[Sequence[str]] = None,
) -> None:
    """Write CSV rows to ``path``, or to standard output when no path is given"""
    lines = []
    if header:
        lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_format_cell(cell) for cell in row))
    text = "\n".join(lines) + ("\n" if lines else "")

    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
        logger.debug(f"Wrote {len(lines)} CSV lines to {path}")


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else format_float(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def write_json(data: Any, path: Optional[PathLike] = None) -> None:
    """Deterministic JSON: sorted keys, 2-space indent, non-finite floats as strings"""
    text = json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
        logger.debug(f"Wrote JSON to {path}")


def read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataParseError(f"Cannot read {path}: {exc.strerror}", path=str(path))
    except json.JSONDecodeError as exc:
        raise DataParseError(f"Invalid JSON: {exc.msg}", path=str(path), line=exc.lineno)


def write_diagram(diagram: Diagram, path: Optional[PathLike] = None) -> None:
    write_rows(diagram.pairs, path)


def write_tree(tree: StraightLineTree, vertices_path: Optional[PathLike], edges_path: Optional[PathLike]) -> None:
    """Vertices CSV and edges CSV (a, b, length); a part without a path is skipped"""
    if vertices_path is not None:
        write_rows(tree.vertices.tolist(), vertices_path)
    if edges_path is not None:
        lengths = tree.edge_lengths
        write_rows(((a, b, float(lengths[e])) for e, (a, b) in enumerate(tree.edges)), edges_path)


def load_space(
    points: Optional[PathLike] = None,
    matrix: Optional[PathLike] = None,
    header: bool = False,
    dedup: bool = False,
    validate: bool = True,
) -> MetricSpaceView:
    """Exactly one of a point-cloud CSV or a distance-matrix CSV"""
    if points is not None and matrix is not None:
        raise InvalidArgumentError("Give either a point cloud or a distance matrix, not both", field="input")
    if matrix is not None:
        if dedup:
            raise InvalidArgumentError("Deduplication applies to point clouds only", field="dedup")
        return read_matrix(matrix, header, validate=validate)
    if points is None:
        raise MissingArgumentError("input")

    cloud = read_points(points, header)
    if dedup:
        cloud, _ = deduplicate_points(cloud)
    return MetricSpaceView.from_points(cloud)
