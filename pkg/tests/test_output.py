"""Tests for the CSV, JSON and SVG writers."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from horseshoe_thermo.countable import Verdict
from horseshoe_thermo.errors import EmptyDataError, PreconditionError, ResourceError
from horseshoe_thermo.output import atomic_write, emit_plot, to_jsonable, write_csv, write_json


class TestCsv:
    """Test RFC-4180 tables."""

    def test_cells_and_line_endings(self, tmp_path: Path) -> None:
        path = write_csv(tmp_path / "t.csv", ["a", "b", "c"], [[1, 0.1, True], [2, 1e-20, False]])
        assert path.read_bytes() == b"a,b,c\r\n1,0.1,true\r\n2,1e-20,false\r\n"

    def test_quotes_commas(self, tmp_path: Path) -> None:
        path = write_csv(tmp_path / "t.csv", ["label"], [["x, y"]])
        assert path.read_text().splitlines()[1] == '"x, y"'

    def test_numpy_and_enum_cells(self, tmp_path: Path) -> None:
        path = write_csv(tmp_path / "t.csv", ["n", "v"], [[np.int64(3), Verdict.HOLDS]])
        assert path.read_text().splitlines()[1] == "3,HOLDS"

    def test_rejects_empty(self, tmp_path: Path) -> None:
        with pytest.raises(EmptyDataError):
            write_csv(tmp_path / "t.csv", ["a"], [])
        assert not (tmp_path / "t.csv").exists()


class TestJson:
    """Test JSON payloads."""

    def test_sorted_and_non_finite(self, tmp_path: Path) -> None:
        path = write_json(tmp_path / "r.json", {"b": math.inf, "a": np.array([1.0, math.nan])})
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [1.0, "nan"], "b": "inf"}

    def test_to_jsonable(self) -> None:
        assert to_jsonable(Verdict.FAILS) == "FAILS"
        assert to_jsonable(Path("out") / "x.csv") == "out/x.csv"
        assert to_jsonable((np.float64(-math.inf), np.bool_(True))) == ["-inf", True]
        assert to_jsonable({1: None}) == {"1": None}


class TestPlot:
    """Test deterministic SVG output."""

    def test_byte_identical_rerun(self, tmp_path: Path) -> None:
        x = [0.0, 0.5, 1.0]
        series = {"a": [1.0, 2.0, 3.0], "b": [3.0, 2.0, 1.0]}
        first = emit_plot(tmp_path / "one.svg", x, series, title="t").read_bytes()
        second = emit_plot(tmp_path / "two.svg", x, series, title="t").read_bytes()
        assert first == second
        assert first.lstrip().startswith(b"<?xml")

    def test_scatter(self, tmp_path: Path) -> None:
        path = emit_plot(tmp_path / "s.svg", [1, 2], {"v": [0.1, 0.2]}, kind="scatter")
        assert path.stat().st_size > 0

    def test_rejects(self, tmp_path: Path) -> None:
        with pytest.raises(PreconditionError):
            emit_plot(tmp_path / "p.svg", [1.0], {"v": [1.0]}, kind="bar")
        with pytest.raises(EmptyDataError):
            emit_plot(tmp_path / "p.svg", [], {"v": []})
        with pytest.raises(EmptyDataError):
            emit_plot(tmp_path / "p.svg", [1.0], {})


class TestAtomicWrite:
    """Test write-then-rename."""

    def test_creates_parents_and_leaves_no_temp(self, tmp_path: Path) -> None:
        path = atomic_write(tmp_path / "deep" / "dir" / "f.bin", b"abc")
        assert path.read_bytes() == b"abc"
        assert list(path.parent.glob("*.tmp")) == []

    def test_overwrites(self, tmp_path: Path) -> None:
        target = tmp_path / "f.bin"
        atomic_write(target, b"old")
        atomic_write(target, b"new")
        assert target.read_bytes() == b"new"

    def test_parent_is_a_file(self, tmp_path: Path) -> None:
        blocker = tmp_path / "blocker"
        blocker.write_text("x")
        with pytest.raises(ResourceError):
            atomic_write(blocker / "f.bin", b"abc")
