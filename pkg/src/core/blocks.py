"""
Block partition/assembly, objective evaluation and feasibility checking.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .exceptions import DimensionError, ShapeError
from .types import BinaryMaskBatch, BlockBatch, DenseMatrix, MaskObjectiveReport, SparsityPattern

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Violation:
    """One row or column of one block whose sum is not N."""

    block: int
    axis: str  # "row", "col" or "shape"
    index: int
    total: int

    def to_dict(self) -> dict:
        return {"block": self.block, "axis": self.axis, "index": self.index, "sum": self.total}


@dataclass
class FeasibilityReport:
    """Outcome of check_feasible; truthy when the mask is feasible."""

    feasible: bool
    violations: List[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.feasible


def partition_blocks(matrix: DenseMatrix, pattern: SparsityPattern) -> BlockBatch:
    """
    Cut ``matrix`` into M×M tiles of absolute values, in row-major tile order.

    Raises:
        DimensionError: if rows or cols is not divisible by ``pattern.m``
    """
    m = pattern.m
    rows, cols = matrix.shape
    if rows % m or cols % m:
        raise DimensionError(
            f"Matrix {rows}x{cols} cannot be partitioned into {m}x{m} blocks"
        )
    tile_rows, tile_cols = rows // m, cols // m
    blocks = (
        np.abs(matrix.values)
        .reshape(tile_rows, m, tile_cols, m)
        .transpose(0, 2, 1, 3)
        .reshape(tile_rows * tile_cols, m, m)
    )
    grid_r, grid_c = np.meshgrid(np.arange(tile_rows), np.arange(tile_cols), indexing="ij")
    origin = np.stack([grid_r.ravel(), grid_c.ravel()], axis=1)
    logger.debug(f"Partitioned {rows}x{cols} matrix into {blocks.shape[0]} blocks of {m}x{m}")
    return BlockBatch(blocks, origin, (rows, cols))


def assemble_mask(batch: BinaryMaskBatch, origin: np.ndarray, rows: int, cols: int) -> DenseMatrix:
    """
    Place per-block masks back at their tile offsets, giving a full-size 0/1 matrix.

    Raises:
        ShapeError: if the block count, tile grid or origin map disagree with ``rows``×``cols``
    """
    m = batch.m
    origin = np.asarray(origin, dtype=np.int64).reshape(-1, 2)
    if rows % m or cols % m:
        raise ShapeError(f"Declared size {rows}x{cols} is not a multiple of block side {m}")
    tile_rows, tile_cols = rows // m, cols // m
    if origin.shape[0] != batch.b or batch.b != tile_rows * tile_cols:
        raise ShapeError(
            f"{batch.b} blocks with {origin.shape[0]} origins cannot tile a {rows}x{cols} matrix"
        )
    in_range = (
        (origin[:, 0] >= 0) & (origin[:, 0] < tile_rows) & (origin[:, 1] >= 0) & (origin[:, 1] < tile_cols)
    )
    if not in_range.all():
        raise ShapeError("Origin map points outside the declared tile grid")
    flat = origin[:, 0] * tile_cols + origin[:, 1]
    if np.unique(flat).size != flat.size:
        raise ShapeError("Origin map is not a bijection onto tiles")

    grid = np.zeros((tile_rows, tile_cols, m, m), dtype=np.float64)
    grid[origin[:, 0], origin[:, 1]] = batch.bits
    return DenseMatrix(grid.transpose(0, 2, 1, 3).reshape(rows, cols))


def mask_objective(batch: BlockBatch, mask: BinaryMaskBatch) -> MaskObjectiveReport:
    """
    Σ S_ij |W_ij| per block and summed over blocks.

    The per-block sums only touch their own block and the total is an exactly rounded
    ``math.fsum``, so the result does not depend on processing order or worker count.
    """
    if mask.bits.shape != batch.magnitudes.shape:
        raise ShapeError(
            f"Mask shape {mask.bits.shape} does not match blocks {batch.magnitudes.shape}"
        )
    selected = np.where(mask.bits, batch.magnitudes, 0.0).reshape(batch.b, -1)
    per_block = np.array([math.fsum(row) for row in selected], dtype=np.float64)
    return MaskObjectiveReport(objective=math.fsum(per_block), per_block=per_block)


def check_feasible(
    mask: BinaryMaskBatch, pattern: SparsityPattern, at_most: bool = False
) -> FeasibilityReport:
    """
    True iff every row and column of every block sums to exactly ``pattern.n``.

    With ``at_most=True`` only the weaker ``sum <= n`` form is required (Bi-NM and
    simple rounding produce possibly under-full masks).
    """
    if mask.m != pattern.m:
        return FeasibilityReport(False, [Violation(-1, "shape", mask.m, pattern.m)])

    n = pattern.n
    violations: List[Violation] = []
    for axis, sums in (("row", mask.row_sums()), ("col", mask.col_sums())):
        bad = sums > n if at_most else sums != n
        for block, index in zip(*np.nonzero(bad)):
            violations.append(Violation(int(block), axis, int(index), int(sums[block, index])))
    violations.sort(key=lambda v: (v.block, v.axis != "row", v.index))
    return FeasibilityReport(not violations, violations)


def group_topn_mask(values: np.ndarray, n: int, m: int, axis: int = -1) -> np.ndarray:
    """
    Keep the ``n`` largest entries of every group of ``m`` consecutive entries along ``axis``.

    Ties go to the lower index. Returns a boolean array shaped like ``values``.
    """
    values = np.asarray(values, dtype=np.float64)
    moved = np.moveaxis(values, axis, -1)
    length = moved.shape[-1]
    if length % m:
        raise DimensionError(f"Axis of length {length} is not divisible by group size {m}")
    groups = moved.reshape(moved.shape[:-1] + (length // m, m))
    order = np.argsort(-groups, axis=-1, kind="stable")
    keep = np.zeros(groups.shape, dtype=bool)
    np.put_along_axis(keep, order[..., :n], True, axis=-1)
    return np.moveaxis(keep.reshape(moved.shape), -1, axis)


def fill_rows_by_priority(priority: np.ndarray, n: int) -> np.ndarray:
    """
    Build one feasible mask per priority matrix, filling rows top to bottom.

    In each row the columns whose remaining need equals the number of rows left are
    taken first; the remaining slots go to the highest-priority columns that still
    need entries (ties: lower column index). Since every column's need stays at or
    below the number of rows left, no row ever dead-ends.

    Args:
        priority: (k, m, m) array; ``priority[s, i, j]`` ranks column j for row i of mask s
        n: entries per row and column

    Returns:
        (k, m, m) boolean array of masks with all row and column sums equal to ``n``
    """
    priority = np.asarray(priority, dtype=np.float64)
    k, m, _ = priority.shape
    masks = np.zeros((k, m, m), dtype=bool)
    need = np.full((k, m), n, dtype=np.int64)
    lanes = np.arange(k)[:, None]
    for row in range(m):
        rows_left = m - row
        forced = need == rows_left
        # forced columns first, then available ones by priority, then the rest
        key = np.where(forced, np.inf, np.where(need > 0, priority[:, row, :], -np.inf))
        order = np.argsort(-key, axis=1, kind="stable")[:, :n]
        masks[lanes, row, order] = True
        need[lanes, order] -= 1
    return masks
