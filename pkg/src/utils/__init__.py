"""Utility modules: file formats, reports, mask validation and logging."""

from .matrix_io import load_input, read_csv, read_mask, read_matrix, write_csv, write_mask, write_matrix
from .mask_validator import MaskValidator
from .reports import BenchReport, SolverRecord, write_bench_report, write_sweep_csv, write_trace

__all__ = [
    "load_input",
    "read_csv",
    "read_mask",
    "read_matrix",
    "write_csv",
    "write_mask",
    "write_matrix",
    "MaskValidator",
    "BenchReport",
    "SolverRecord",
    "write_bench_report",
    "write_sweep_csv",
    "write_trace",
]
