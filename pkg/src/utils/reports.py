"""
Benchmark reports and ADMM traces.

JSON output keeps a fixed key order and leaves wall-clock fields null unless timings
are requested, so identical inputs and seeds give byte-identical files.
"""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..core.exceptions import IoError

logger = logging.getLogger(__name__)

REPORT_FORMAT = "tnm-bench/1"

PathLike = Union[str, Path]


@dataclass
class SolverRecord:
    """Aggregate result of one solver on one pattern."""

    solver: str
    pattern: str
    blocks: int
    mean_relative_error: float
    max_relative_error: float
    mean_objective: float
    wall_ms: float
    seed: int
    feasible: bool = True
    improved_fraction: Optional[float] = None

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        return {
            "solver": self.solver,
            "pattern": self.pattern,
            "blocks": self.blocks,
            "mean_relative_error": self.mean_relative_error,
            "max_relative_error": self.max_relative_error,
            "mean_objective": self.mean_objective,
            "wall_ms": round(self.wall_ms, 3) if include_timings else None,
            "seed": self.seed,
            "feasible": self.feasible,
            "improved_fraction": self.improved_fraction,
        }


@dataclass
class BenchReport:
    """Per-solver records of one benchmark or sweep run."""

    distribution: str
    seed: int
    records: List[SolverRecord] = field(default_factory=list)
    note: str = "Synthetic blocks with standard-distribution magnitudes stand in for model weights."

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "note": self.note,
            "distribution": self.distribution,
            "seed": self.seed,
            "records": [r.to_dict(include_timings) for r in self.records],
        }

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, allow_nan=False) + "\n"

    def record(self, solver: str, pattern: str) -> SolverRecord:
        """Look up one record; raises KeyError if absent."""
        for r in self.records:
            if r.solver == solver and r.pattern == pattern:
                return r
        raise KeyError(f"No record for {solver} at {pattern}")


def _write_text(path: PathLike, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e.strerror or e}") from e


def write_bench_report(path: PathLike, report: BenchReport, include_timings: bool = False) -> None:
    _write_text(path, report.to_json(include_timings))
    logger.info(f"📄 Report saved to: {path}")


SWEEP_COLUMNS = ["pattern", "variant", "mean_relative_error", "max_relative_error", "wall_ms", "improved_fraction"]


def write_sweep_csv(path: PathLike, report: BenchReport) -> None:
    """Summary table of a sweep; always includes timings."""
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS)
            writer.writeheader()
            for r in report.records:
                writer.writerow(
                    {
                        "pattern": r.pattern,
                        "variant": r.solver,
                        "mean_relative_error": f"{r.mean_relative_error:.6g}",
                        "max_relative_error": f"{r.max_relative_error:.6g}",
                        "wall_ms": f"{r.wall_ms:.3f}",
                        "improved_fraction": "" if r.improved_fraction is None else f"{r.improved_fraction:.4f}",
                    }
                )
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e.strerror or e}") from e
    logger.info(f"📄 Sweep table saved to: {path}")


def write_trace(path: PathLike, payload: Dict[str, Any]) -> None:
    """Write an ADMM/pruning trace as pretty-printed JSON."""
    _write_text(path, json.dumps(payload, indent=2) + "\n")
    logger.info(f"📄 Trace saved to: {path}")
