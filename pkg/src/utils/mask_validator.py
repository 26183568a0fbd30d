"""
Mask file validation: N:M group sums along rows and, optionally, along columns.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from ..core.exceptions import DimensionError
from ..core.types import SparsityPattern
from .matrix_io import read_mask

logger = logging.getLogger(__name__)


class MaskValidator:
    """Validates full-size 0/1 masks against an N:M pattern."""

    def __init__(self, pattern: SparsityPattern, transposable: bool = False, at_most: bool = False):
        """
        Args:
            pattern: N:M pattern to check
            transposable: also check column groups
            at_most: accept group sums below n (Bi-NM style masks)
        """
        self.pattern = pattern
        self.transposable = transposable
        self.at_most = at_most

    def _group_violations(self, mask: np.ndarray, axis: str) -> List[Dict]:
        n, m = self.pattern.n, self.pattern.m
        data = mask if axis == "row" else mask.T
        lines, length = data.shape
        sums = data.reshape(lines, length // m, m).sum(axis=2)
        bad = sums > n if self.at_most else sums != n
        return [
            {"axis": axis, axis: int(line), "group": int(group), "sum": int(sums[line, group])}
            for line, group in zip(*np.nonzero(bad))
        ]

    def validate(self, mask: np.ndarray) -> Tuple[bool, List[Dict]]:
        """
        Check every group of m consecutive entries along each row (and column).

        Returns:
            Tuple of (is_valid, violations)

        Raises:
            DimensionError: if a checked dimension is not divisible by m
        """
        mask = np.asarray(mask, dtype=np.int64)
        m = self.pattern.m
        rows, cols = mask.shape
        if cols % m or (self.transposable and rows % m):
            raise DimensionError(f"Mask {rows}x{cols} cannot be grouped by M={m}")

        violations = self._group_violations(mask, "row")
        if self.transposable:
            violations += self._group_violations(mask, "col")
        if violations:
            logger.debug(f"{len(violations)} group violations against {self.pattern}")
        return not violations, violations

    def validate_file(self, file_path: Union[str, Path]) -> Tuple[bool, List[Dict]]:
        """Read a TNM1 mask file and validate it."""
        return self.validate(read_mask(file_path))
