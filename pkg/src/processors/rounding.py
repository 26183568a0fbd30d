"""
Rounding of fractional plans to feasible transposable masks.

Greedy selection walks each block's cells in descending score order and keeps a cell
while both its row and column still have room. Local search then fixes the leftover
deficits with swaps: insert (i, j′) and (i′, j), remove (i′, j′). A final completion
pass closes any deficit local search left behind so every block ends with exact sums.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from ..config.solver_profiles import DykstraConfig, RoundingConfig
from ..core.blocks import (
    assemble_mask,
    check_feasible,
    group_topn_mask,
    mask_objective,
    partition_blocks,
)
from ..core.exceptions import InfeasibleInternalError, PreconditionError
from ..core.executor import BlockExecutor
from ..core.types import (
    BinaryMaskBatch,
    BlockBatch,
    DenseMatrix,
    MaskObjectiveReport,
    SparsityPattern,
)
from .dykstra import dykstra_solve

logger = logging.getLogger(__name__)

# variant name -> (score source, rounding method)
ROUNDING_VARIANTS: Dict[str, Tuple[str, str]] = {
    "entropy+simple": ("entropy", "simple"),
    "entropy+greedy": ("entropy", "greedy"),
    "entropy+greedy+ls": ("entropy", "greedy+ls"),
    "direct+greedy": ("direct", "greedy"),
    "direct+greedy+ls": ("direct", "greedy+ls"),
}

FULL_PIPELINE = "entropy+greedy+ls"


@dataclass
class GreedyState:
    """
    Masks and occupancy counters after greedy selection (batched over blocks).

    Attributes:
        mask: (b, m, m) bool
        row_counts: (b, m) R_i = Σ_j mask[i, j]
        col_counts: (b, m) C_j = Σ_i mask[i, j]
    """

    mask: np.ndarray
    row_counts: np.ndarray
    col_counts: np.ndarray

    def consistent(self) -> bool:
        """True when the counters match the mask's actual row and column sums."""
        return bool(
            np.array_equal(self.row_counts, self.mask.sum(axis=2))
            and np.array_equal(self.col_counts, self.mask.sum(axis=1))
        )


@dataclass
class SolveResult:
    """
    Output of the mask pipeline.

    ``sweeps``, ``swaps`` and ``completions`` are per-block counts.
    """

    mask: BinaryMaskBatch
    report: MaskObjectiveReport
    batch: BlockBatch
    variant: str = FULL_PIPELINE
    sweeps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    swaps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    completions: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def objective(self) -> float:
        return self.report.objective

    def assembled(self) -> DenseMatrix:
        """Full-size 0/1 mask matrix."""
        rows, cols = self.batch.source_shape
        return assemble_mask(self.mask, self.batch.origin, rows, cols)


def greedy_round(scores: np.ndarray, pattern: SparsityPattern) -> Tuple[BinaryMaskBatch, GreedyState]:
    """
    Greedy selection by descending score with row/column capacity counters.

    Ties are broken by ascending flat index i·m + j.

    Args:
        scores: (b, m, m) or (m, m) ranking values
        pattern: N:M pattern

    Returns:
        (possibly incomplete mask batch, final counters)
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim == 2:
        scores = scores[None]
    b, m, _ = scores.shape
    n = pattern.n

    order = np.argsort(-scores.reshape(b, m * m), axis=1, kind="stable")
    mask = np.zeros((b, m, m), dtype=bool)
    row_counts = np.zeros((b, m), dtype=np.int64)
    col_counts = np.zeros((b, m), dtype=np.int64)
    lanes = np.arange(b)

    for rank in range(m * m):
        rows, cols = np.divmod(order[:, rank], m)
        take = (row_counts[lanes, rows] < n) & (col_counts[lanes, cols] < n)
        if not take.any():
            continue
        sel = lanes[take]
        mask[sel, rows[take], cols[take]] = True
        row_counts[sel, rows[take]] += 1
        col_counts[sel, cols[take]] += 1

    state = GreedyState(mask, row_counts, col_counts)
    complete = bool((row_counts == n).all() and (col_counts == n).all())
    return BinaryMaskBatch(mask, complete=complete), state


def swap_sentinel(weights: np.ndarray) -> float:
    """Stand-in for −∞: strictly below any attainable finite swap gain."""
    return -(1.0 + 3.0 * float(np.max(weights, initial=0.0)))


def _batched_swap_scores(weights, mask, rows, cols, sentinel):
    """Swap gains for a stack of blocks, each with its own deficit pair (rows[k], cols[k])."""
    k, m, _ = weights.shape
    lanes = np.arange(k)
    row_i_w = weights[lanes, rows, :][:, None, :]  # |W[i, j′]| along axis 2
    col_j_w = weights[lanes, :, cols][:, :, None]  # |W[i′, j]| along axis 1
    gain = row_i_w + col_j_w - weights

    row_i_s = mask[lanes, rows, :][:, None, :]
    col_j_s = mask[lanes, :, cols][:, :, None]
    index = np.arange(m)
    valid = (
        mask
        & ~row_i_s
        & ~col_j_s
        & (index[None, :, None] != rows[:, None, None])
        & (index[None, None, :] != cols[:, None, None])
    )
    return np.where(valid, gain, sentinel[:, None, None]), valid


def swap_score(weights: np.ndarray, mask: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """
    Swap gains for deficit row ``i`` and deficit column ``j`` of one block.

    Entry (i′, j′) is |W[i, j′]| + |W[i′, j]| − |W[i′, j′]| when (i′, j′) is selected,
    (i, j′) and (i′, j) are free, i′ ≠ i and j′ ≠ j; every other entry is the sentinel.

    Raises:
        PreconditionError: if row ``i`` or column ``j`` is already full
    """
    weights = np.abs(np.asarray(weights, dtype=np.float64))
    mask = np.asarray(mask, dtype=bool)
    if mask[i, :].sum() >= n or mask[:, j].sum() >= n:
        raise PreconditionError(f"Row {i} and column {j} must both hold fewer than {n} entries")
    sentinel = np.array([swap_sentinel(weights)])
    scores, _ = _batched_swap_scores(weights[None], mask[None], np.array([i]), np.array([j]), sentinel)
    return scores[0]


def _first_deficit(counts: np.ndarray, n: int) -> np.ndarray:
    return np.argmax(counts < n, axis=1)


def _local_search_bits(weights: np.ndarray, bits: np.ndarray, n: int, steps: int):
    """Apply up to ``steps`` positive-gain swaps per block. Returns (bits, swaps per block)."""
    bits = bits.copy()
    b, m, _ = bits.shape
    swaps = np.zeros(b, dtype=np.int64)
    stalled = np.zeros(b, dtype=bool)
    sentinels = -(1.0 + 3.0 * weights.reshape(b, m * m).max(axis=1, initial=0.0))

    for _ in range(steps):
        row_counts = bits.sum(axis=2)
        col_counts = bits.sum(axis=1)
        deficient = (row_counts < n).any(axis=1) & ~stalled
        idx = np.flatnonzero(deficient)
        if idx.size == 0:
            break
        rows = _first_deficit(row_counts[idx], n)
        cols = _first_deficit(col_counts[idx], n)
        scores, _ = _batched_swap_scores(weights[idx], bits[idx], rows, cols, sentinels[idx])
        best = np.argmax(scores.reshape(idx.size, -1), axis=1)
        best_value = scores.reshape(idx.size, -1)[np.arange(idx.size), best]
        apply = best_value > 0

        stalled[idx[~apply]] = True
        if apply.any():
            k = idx[apply]
            r_swap, c_swap = np.divmod(best[apply], m)
            bits[k, r_swap, c_swap] = False
            bits[k, r_swap, cols[apply]] = True
            bits[k, rows[apply], c_swap] = True
            swaps[k] += 1
    return bits, swaps


def local_search(
    weights: BlockBatch,
    mask: BinaryMaskBatch,
    pattern: SparsityPattern,
    config: Optional[RoundingConfig] = None,
) -> BinaryMaskBatch:
    """
    Swap-based repair of greedy masks, scored on |W|.

    Per block, up to L times: pick the lowest-index deficit row and column, take the
    best swap, and apply it only when its gain is strictly positive; otherwise stop.
    """
    config = config or RoundingConfig()
    bits, _ = _local_search_bits(weights.magnitudes, mask.bits, pattern.n, config.local_search_steps)
    return BinaryMaskBatch(bits, complete=bool(check_feasible(BinaryMaskBatch(bits), pattern)))


def _complete_block(weights: np.ndarray, bits: np.ndarray, n: int) -> int:
    """Close every deficit of one block in place. Returns the number of completion moves."""
    m = bits.shape[0]
    sentinel = np.array([swap_sentinel(weights)])
    moves = 0
    while True:
        deficit_rows = np.flatnonzero(bits.sum(axis=1) < n)
        deficit_cols = np.flatnonzero(bits.sum(axis=0) < n)
        if deficit_rows.size == 0:
            return moves
        applied = False
        for i in deficit_rows:
            for j in deficit_cols:
                if not bits[i, j]:
                    bits[i, j] = True
                    applied = True
                    break
                scores, valid = _batched_swap_scores(
                    weights[None], bits[None], np.array([i]), np.array([j]), sentinel
                )
                candidates = np.flatnonzero(valid[0].ravel())
                if candidates.size == 0:
                    continue
                r, c = np.divmod(candidates, m)
                # highest inserted |W[i, j′]|, then higher gain, then lower flat index
                pick = np.lexsort((candidates, -scores[0].ravel()[candidates], -weights[i, c]))[0]
                r_swap, c_swap = r[pick], c[pick]
                bits[r_swap, c_swap] = False
                bits[r_swap, j] = True
                bits[i, c_swap] = True
                applied = True
                break
            if applied:
                break
        if not applied:
            return moves
        moves += 1


def complete_masks(weights: np.ndarray, bits: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Completion pass over a batch. Returns (bits, completion moves per block).

    For the lowest deficit (row, col) pair the cell is inserted directly when free;
    otherwise the valid swap inserting the largest |W[i, j′]| is applied whatever its gain.
    """
    bits = bits.copy()
    moves = np.zeros(bits.shape[0], dtype=np.int64)
    deficient = (bits.sum(axis=2) < n).any(axis=1)
    for k in np.flatnonzero(deficient):
        moves[k] = _complete_block(weights[k], bits[k], n)
    return bits, moves


def simple_round(values: np.ndarray, pattern: SparsityPattern) -> BinaryMaskBatch:
    """
    Row-then-column rounding: top-n per row, then top-n per column of the row-masked values.

    Row and column sums are at most n; the mask may be under-full.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 2:
        values = values[None]
    n = pattern.n
    m = values.shape[1]
    by_row = group_topn_mask(values, n, m, axis=2)
    by_col = group_topn_mask(np.where(by_row, values, 0.0), n, m, axis=1)
    return BinaryMaskBatch(by_row & by_col)


def _round_chunk(
    batch: BlockBatch,
    pattern: SparsityPattern,
    dcfg: DykstraConfig,
    rcfg: RoundingConfig,
    variant: str,
):
    source, method = ROUNDING_VARIANTS[variant]
    weights = batch.magnitudes
    b = batch.b
    sweeps = np.zeros(b, dtype=np.int64)

    if source == "entropy":
        frac = dykstra_solve(batch, pattern, dcfg)
        scores = frac.values
        sweeps = frac.sweeps
    else:
        scores = weights

    if method == "simple":
        bits = simple_round(scores, pattern).bits
        return bits, sweeps, np.zeros(b, dtype=np.int64), np.zeros(b, dtype=np.int64)

    _, state = greedy_round(scores, pattern)
    bits = state.mask
    swaps = np.zeros(b, dtype=np.int64)
    if method == "greedy+ls":
        bits, swaps = _local_search_bits(weights, bits, pattern.n, rcfg.local_search_steps)
    completions = np.zeros(b, dtype=np.int64)
    if rcfg.complete:
        bits, completions = complete_masks(weights, bits, pattern.n)
    return bits, sweeps, swaps, completions


def solve_blocks(
    batch: BlockBatch,
    pattern: SparsityPattern,
    dcfg: Optional[DykstraConfig] = None,
    rcfg: Optional[RoundingConfig] = None,
    executor: Optional[BlockExecutor] = None,
    variant: str = FULL_PIPELINE,
) -> SolveResult:
    """
    Run one rounding variant over a block batch.

    Args:
        batch: magnitude blocks
        pattern: N:M pattern
        dcfg: Dykstra settings (entropy variants only)
        rcfg: rounding settings
        executor: block-parallel executor (single-threaded if omitted)
        variant: key of ROUNDING_VARIANTS

    Returns:
        SolveResult

    Raises:
        ValueError: unknown variant
        InfeasibleInternalError: a greedy-variant block is not exactly feasible, or a
            simple-variant block exceeds n somewhere
    """
    if variant not in ROUNDING_VARIANTS:
        raise ValueError(f"Unknown rounding variant {variant!r}; choose from {', '.join(ROUNDING_VARIANTS)}")
    dcfg = dcfg or DykstraConfig()
    rcfg = rcfg or RoundingConfig()
    executor = executor or BlockExecutor(1)

    bits, sweeps, swaps, completions = executor.map_arrays(
        lambda chunk, offset: _round_chunk(chunk, pattern, dcfg, rcfg, variant), batch
    )
    at_most = ROUNDING_VARIANTS[variant][1] == "simple" or not rcfg.complete
    mask = BinaryMaskBatch(bits)
    feasibility = check_feasible(mask, pattern, at_most=at_most)
    if not feasibility:
        first = feasibility.violations[0]
        raise InfeasibleInternalError(
            f"{variant} produced an infeasible mask: block {first.block} {first.axis} "
            f"{first.index} sums to {first.total} ({len(feasibility.violations)} violations)"
        )
    complete = not at_most or bool(check_feasible(mask, pattern))
    mask = BinaryMaskBatch(bits, complete=complete)
    logger.debug(
        f"{variant}: {batch.b} blocks, {int(swaps.sum())} swaps, {int(completions.sum())} completion moves"
    )
    return SolveResult(
        mask=mask,
        report=mask_objective(batch, mask),
        batch=batch,
        variant=variant,
        sweeps=sweeps,
        swaps=swaps,
        completions=completions,
    )


def solve_mask(
    matrix: DenseMatrix,
    pattern: SparsityPattern,
    dcfg: Optional[DykstraConfig] = None,
    rcfg: Optional[RoundingConfig] = None,
    executor: Optional[BlockExecutor] = None,
) -> SolveResult:
    """
    Full pipeline: partition → Dykstra → greedy on the fractional plan → local search
    on |W| → completion → feasibility check.
    """
    batch = partition_blocks(matrix, pattern)
    result = solve_blocks(batch, pattern, dcfg, rcfg, executor, FULL_PIPELINE)
    if not result.mask.complete:
        raise InfeasibleInternalError("Rounding left deficient blocks; enable the completion pass")
    logger.debug(f"Solved {batch.b} blocks at {pattern}, objective {result.objective:.6f}")
    return result


class TransposableMaskSolver:
    """
    Entropy solver plus rounding, bound to one set of settings and one executor.
    """

    def __init__(
        self,
        dykstra_cfg: Optional[DykstraConfig] = None,
        rounding_cfg: Optional[RoundingConfig] = None,
        executor: Optional[BlockExecutor] = None,
    ):
        self.dykstra_cfg = dykstra_cfg or DykstraConfig()
        self.rounding_cfg = rounding_cfg or RoundingConfig()
        self.executor = executor or BlockExecutor(1)
        logger.debug(
            f"Mask solver ready: tau_scale={self.dykstra_cfg.tau_scale:g}, "
            f"{self.dykstra_cfg.max_iters} sweeps, {self.rounding_cfg.local_search_steps} swaps"
        )

    def solve(self, matrix: DenseMatrix, pattern: SparsityPattern) -> SolveResult:
        """Exactly feasible transposable mask for ``matrix`` (see ``solve_mask``)."""
        return solve_mask(matrix, pattern, self.dykstra_cfg, self.rounding_cfg, self.executor)

    def solve_blocks(
        self, batch: BlockBatch, pattern: SparsityPattern, variant: str = FULL_PIPELINE
    ) -> SolveResult:
        return solve_blocks(batch, pattern, self.dykstra_cfg, self.rounding_cfg, self.executor, variant)

    def mask_weights(
        self, scores: DenseMatrix, weights: DenseMatrix, pattern: SparsityPattern
    ) -> Tuple[DenseMatrix, np.ndarray, SolveResult]:
        """
        Solve on ``scores`` and zero every entry of ``weights`` outside the mask.

        Returns:
            (masked weights, boolean mask, solver result)
        """
        if scores.shape != weights.shape:
            raise PreconditionError(f"Score shape {scores.shape} does not match weight shape {weights.shape}")
        result = self.solve(scores, pattern)
        mask = result.assembled().values > 0.5
        return DenseMatrix(np.where(mask, weights.values, 0.0)), mask, result
