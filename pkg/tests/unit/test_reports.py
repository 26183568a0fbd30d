"""Unit tests for benchmark reports and traces."""

import csv
import json

import pytest

from src.utils.reports import (
    REPORT_FORMAT,
    SWEEP_COLUMNS,
    BenchReport,
    SolverRecord,
    write_bench_report,
    write_sweep_csv,
    write_trace,
)


def _record(solver, pattern="8:16", wall_ms=12.3456, improved=None):
    return SolverRecord(
        solver=solver,
        pattern=pattern,
        blocks=100,
        mean_relative_error=0.0125,
        max_relative_error=0.05,
        mean_objective=42.0,
        wall_ms=wall_ms,
        seed=3,
        improved_fraction=improved,
    )


class TestBenchReport:
    """BenchReport serialization."""

    def setup_method(self):
        self.report = BenchReport(distribution="gaussian", seed=3)
        self.report.records.append(_record("tsenor"))
        self.report.records.append(_record("greedy2", wall_ms=99.0))

    def test_timings_null_by_default(self):
        data = json.loads(self.report.to_json())
        assert data["format"] == REPORT_FORMAT
        assert [r["wall_ms"] for r in data["records"]] == [None, None]

    def test_timings_when_requested(self):
        data = json.loads(self.report.to_json(include_timings=True))
        assert data["records"][0]["wall_ms"] == 12.346

    def test_json_ignores_wall_clock(self):
        other = BenchReport(distribution="gaussian", seed=3)
        other.records.append(_record("tsenor", wall_ms=1.0))
        other.records.append(_record("greedy2", wall_ms=2.0))
        assert other.to_json() == self.report.to_json()

    def test_key_order(self):
        data = json.loads(self.report.to_json())
        assert list(data) == ["format", "note", "distribution", "seed", "records"]
        assert list(data["records"][0])[:3] == ["solver", "pattern", "blocks"]

    def test_record_lookup(self):
        assert self.report.record("greedy2", "8:16").wall_ms == 99.0
        with pytest.raises(KeyError):
            self.report.record("binm", "8:16")

    def test_write_report(self, temp_dir):
        path = temp_dir / "bench.json"
        write_bench_report(path, self.report)
        assert path.read_text() == self.report.to_json()


class TestSweepTable:
    """write_sweep_csv."""

    def test_columns_and_rows(self, temp_dir):
        report = BenchReport(distribution="gaussian", seed=0)
        report.records.append(_record("greedy", pattern="2:4"))
        report.records.append(_record("greedy+ls", pattern="2:4", improved=0.25))
        path = temp_dir / "sweep.csv"
        write_sweep_csv(path, report)

        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert list(rows[0]) == SWEEP_COLUMNS
        assert [r["variant"] for r in rows] == ["greedy", "greedy+ls"]
        assert rows[0]["improved_fraction"] == ""
        assert rows[1]["improved_fraction"] == "0.2500"
        assert rows[1]["wall_ms"] == "12.346"


class TestTrace:
    """write_trace."""

    def test_pretty_json(self, temp_dir):
        path = temp_dir / "trace.json"
        write_trace(path, {"command": "prune", "kept": 8})
        text = path.read_text()
        assert text.endswith("\n")
        assert json.loads(text) == {"command": "prune", "kept": 8}
