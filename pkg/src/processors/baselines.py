"""
Comparison heuristics: magnitude greedy (2-approximation), Bi-NM and random best-of-K.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..config.solver_profiles import RoundingConfig
from ..core.blocks import fill_rows_by_priority, group_topn_mask
from ..core.executor import BlockExecutor
from ..core.types import BinaryMaskBatch, BlockBatch, DenseMatrix, SparsityPattern
from .rounding import simple_round, solve_blocks

logger = logging.getLogger(__name__)

BASELINE_KINDS = ("greedy2approx", "binm", "random_best")


@dataclass(frozen=True)
class BaselineChoice:
    """Which baseline to run and with what sampling parameters."""

    kind: str = "greedy2approx"
    k: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"Unknown baseline {self.kind!r}; choose from {', '.join(BASELINE_KINDS)}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


def two_approximation(
    batch: BlockBatch, pattern: SparsityPattern, executor: Optional[BlockExecutor] = None
) -> BinaryMaskBatch:
    """Greedy on |W| with capacity counters, then the completion pass. No local search."""
    result = solve_blocks(
        batch, pattern, rcfg=RoundingConfig(complete=True), executor=executor, variant="direct+greedy"
    )
    return result.mask


def bi_nm(matrix: DenseMatrix, pattern: SparsityPattern) -> DenseMatrix:
    """
    Row-wise N:M on |W|, then column-wise N:M on the row-masked magnitudes.

    Every group of m consecutive entries along a row or a column keeps at most n.

    Raises:
        DimensionError: if either dimension is not divisible by m
    """
    magnitudes = np.abs(matrix.values)
    by_row = group_topn_mask(magnitudes, pattern.n, pattern.m, axis=1)
    by_col = group_topn_mask(np.where(by_row, magnitudes, 0.0), pattern.n, pattern.m, axis=0)
    return DenseMatrix((by_row & by_col).astype(np.float64))


def bi_nm_blocks(batch: BlockBatch, pattern: SparsityPattern) -> BinaryMaskBatch:
    """Bi-NM on each block; identical to applying ``bi_nm`` to the source matrix."""
    return simple_round(batch.magnitudes, pattern)


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    """Generator for one block, independent of how blocks are distributed over workers."""
    return np.random.default_rng(np.random.SeedSequence([seed, block_index]))


def random_best(
    block: np.ndarray, pattern: SparsityPattern, k: int, seed: int, block_index: int = 0
) -> Tuple[np.ndarray, float]:
    """
    Best of ``k`` random feasible masks.

    Masks are built row by row: columns that must be used in every remaining row are
    forced, the other slots go to random available columns. Same seed, same block
    index → same mask; growing ``k`` only appends samples.

    Returns:
        (m×m bool mask, objective)
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    weights = np.abs(np.asarray(block, dtype=np.float64))
    m = weights.shape[0]
    priority = block_rng(seed, block_index).random((k, m, m))
    masks = fill_rows_by_priority(priority, pattern.n)
    scores = np.where(masks, weights, 0.0).sum(axis=(1, 2))
    best = int(np.argmax(scores))
    return masks[best], float(scores[best])


def random_best_batch(
    batch: BlockBatch,
    pattern: SparsityPattern,
    k: int,
    seed: int,
    executor: Optional[BlockExecutor] = None,
) -> BinaryMaskBatch:
    """``random_best`` over every block, seeded per global block index."""
    executor = executor or BlockExecutor(1)

    def chunk(sub: BlockBatch, offset: int):
        masks = np.stack(
            [random_best(sub.magnitudes[t], pattern, k, seed, offset + t)[0] for t in range(sub.b)]
        )
        return (masks,)

    (masks,) = executor.map_arrays(chunk, batch)
    return BinaryMaskBatch(masks, complete=True)


def run_baseline(
    choice: BaselineChoice,
    batch: BlockBatch,
    pattern: SparsityPattern,
    executor: Optional[BlockExecutor] = None,
) -> BinaryMaskBatch:
    """Dispatch on ``choice.kind``."""
    if choice.kind == "greedy2approx":
        return two_approximation(batch, pattern, executor)
    if choice.kind == "binm":
        return bi_nm_blocks(batch, pattern)
    return random_best_batch(batch, pattern, choice.k, choice.seed, executor)
