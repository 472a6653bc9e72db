"""
Tests for the CSV and JSON readers and writers.
"""

import json
import math
import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.append(str(ROOT_DIR))

import numpy as np
import pytest

from metric_forest.exceptions import DataParseError, InvalidArgumentError, MissingArgumentError
from metric_forest.graphs import StraightLineTree
from metric_forest.io import (
    format_float,
    load_space,
    read_diagram,
    read_edges,
    read_json,
    read_matrix,
    read_points,
    read_tree,
    write_diagram,
    write_json,
    write_rows,
    write_tree,
)
from metric_forest.mergegram import Diagram
from metric_forest.metric_core import EXPLICIT


class TestFormatting:
    """Float text representation"""

    def test_seventeen_digits(self):
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(2.0) == "2"

    def test_infinity(self):
        assert format_float(math.inf) == "inf"
        assert format_float(-math.inf) == "-inf"

    def test_points_survive_a_write(self, tmp_path):
        """Values read back are bit-identical"""
        points = np.random.default_rng(0).normal(size=(20, 3))
        path = tmp_path / "points.csv"
        write_rows(points.tolist(), path)
        np.testing.assert_array_equal(read_points(path), points)


class TestReaders:
    """Parsing and the errors it raises"""

    def test_header_is_skipped(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("x,y\n1,2\n3,4\n")
        assert read_points(path, header=True).tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("1,2\n\n3,4\n")
        assert read_points(path).shape == (2, 2)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("1,2\n3,4\n5\n")
        with pytest.raises(DataParseError) as exc:
            read_points(path)
        assert exc.value.details["line"] == 3
        assert exc.value.exit_code == 2

    def test_non_numeric_row(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("1,2\nfoo,4\n")
        with pytest.raises(DataParseError) as exc:
            read_points(path)
        assert exc.value.details["line"] == 2

    def test_empty_file(self, tmp_path):
        path = tmp_path / "points.csv"
        path.write_text("")
        with pytest.raises(DataParseError):
            read_points(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataParseError):
            read_points(tmp_path / "nope.csv")

    def test_matrix(self, tmp_path):
        path = tmp_path / "matrix.csv"
        path.write_text("0,1,2\n1,0,1\n2,1,0\n")
        space = read_matrix(path)
        assert space.kind == EXPLICIT
        assert space.distance(0, 2) == 2.0

    def test_matrix_must_be_square(self, tmp_path):
        path = tmp_path / "matrix.csv"
        path.write_text("0,1,2\n1,0,1\n")
        with pytest.raises(DataParseError):
            read_matrix(path)

    def test_diagram_with_infinity(self, tmp_path):
        path = tmp_path / "diagram.csv"
        path.write_text("0,1\n0,inf\n")
        assert read_diagram(path) == Diagram([(0, 1), (0, math.inf)])

    def test_diagram_needs_two_columns(self, tmp_path):
        path = tmp_path / "diagram.csv"
        path.write_text("0,1,2\n")
        with pytest.raises(DataParseError):
            read_diagram(path)

    @pytest.mark.parametrize("text", ["0,nan\n", "nan,1\n", "inf,inf\n", "0,1\n3,2\n"])
    def test_bad_diagram_values_are_data_errors(self, tmp_path, text):
        path = tmp_path / "diagram.csv"
        path.write_text(text)
        with pytest.raises(DataParseError) as exc:
            read_diagram(path)
        assert exc.value.exit_code == 2

    def test_edges_need_integer_ids(self, tmp_path):
        path = tmp_path / "edges.csv"
        path.write_text("0,1.5,2\n")
        with pytest.raises(DataParseError):
            read_edges(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "doc.json"
        path.write_text("{\n  oops\n}")
        with pytest.raises(DataParseError) as exc:
            read_json(path)
        assert exc.value.details["line"] == 2


class TestWriters:
    """Output files"""

    def test_json_is_sorted_with_string_infinity(self, tmp_path):
        path = tmp_path / "out.json"
        write_json({"b": math.inf, "a": np.int64(3), "c": np.array([1.5, 2.5])}, path)
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 3, "b": "inf", "c": [1.5, 2.5]}

    def test_rows_to_stdout(self, capsys):
        write_rows([(0, 1, 2.5), (1, 2, True)])
        assert capsys.readouterr().out == "0,1,2.5\n1,2,true\n"

    def test_diagram(self, tmp_path):
        path = tmp_path / "diagram.csv"
        write_diagram(Diagram([(0, math.inf), (0, 1)]), path)
        assert path.read_text() == "0,1\n0,inf\n"

    def test_tree(self, tmp_path):
        tree = StraightLineTree(vertices=[[0, 0], [3, 4], [3, 0]], edges=[(0, 1), (1, 2)])
        vertices, edges = tmp_path / "v.csv", tmp_path / "e.csv"
        write_tree(tree, vertices, edges)
        assert edges.read_text() == "0,1,5\n1,2,4\n"
        again = read_tree(vertices, edges)
        assert again.edges == tree.edges
        np.testing.assert_array_equal(again.vertices, tree.vertices)

    def test_tree_part_without_path(self, tmp_path):
        tree = StraightLineTree(vertices=[[0, 0], [1, 0]], edges=[(0, 1)])
        edges = tmp_path / "e.csv"
        write_tree(tree, None, edges)
        assert edges.exists()
        assert list(tmp_path.iterdir()) == [edges]


class TestLoadSpace:
    """Choosing between point and matrix input"""

    def test_both_inputs(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            load_space(tmp_path / "p.csv", tmp_path / "m.csv")

    def test_no_input(self):
        with pytest.raises(MissingArgumentError):
            load_space()

    def test_dedup_needs_points(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,1\n1,0\n")
        with pytest.raises(InvalidArgumentError):
            load_space(matrix=path, dedup=True)

    def test_dedup_points(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0,0\n1,1\n0,0\n")
        assert load_space(points=path, dedup=True).n == 2
        assert load_space(points=path).n == 3
