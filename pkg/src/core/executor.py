"""
Block-parallel executor.

Every batch routine in this package is per-block independent, so a batch can be cut
into contiguous chunks, solved on a thread pool and concatenated back in block order
with bit-identical results for any worker count. numpy releases the GIL inside its
vectorized kernels, which is where the solvers spend their time.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from .types import BlockBatch

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Smallest chunk handed to a worker thread.
MIN_BLOCKS_PER_CHUNK = 16


def resolve_workers(workers: Optional[int]) -> int:
    """Map the user-facing worker count to an actual thread count (0 or None = all CPUs)."""
    if workers is None or workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise ValueError(f"Worker count must be >= 0, got {workers}")
    return workers


class BlockExecutor:
    """Maps per-chunk solver functions over a BlockBatch on a thread pool."""

    def __init__(self, workers: Optional[int] = 1):
        """
        Args:
            workers: thread count; 0 or None means ``os.cpu_count()``
        """
        self.workers = resolve_workers(workers)

    def chunks(self, b: int) -> List[range]:
        """Split ``range(b)`` into at most ``workers`` contiguous, near-equal ranges."""
        if b == 0:
            return []
        count = max(1, min(self.workers, b // MIN_BLOCKS_PER_CHUNK))
        bounds = [round(i * b / count) for i in range(count + 1)]
        return [range(bounds[i], bounds[i + 1]) for i in range(count) if bounds[i + 1] > bounds[i]]

    def map(self, fn: Callable[[BlockBatch, int], T], batch: BlockBatch) -> List[T]:
        """
        Run ``fn(sub_batch, offset)`` on every chunk and return the results in block order.

        Args:
            fn: per-chunk function; ``offset`` is the global index of the chunk's first block
            batch: blocks to process

        Returns:
            List of per-chunk results, ordered by offset
        """
        spans = self.chunks(batch.b)
        if len(spans) <= 1:
            return [fn(batch, 0)] if batch.b else []

        logger.debug(f"Dispatching {batch.b} blocks as {len(spans)} chunks on {self.workers} threads")
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = [pool.submit(fn, batch.select(s.start, s.stop), s.start) for s in spans]
            return [f.result() for f in futures]

    def map_arrays(self, fn: Callable[[BlockBatch, int], Sequence], batch: BlockBatch) -> list:
        """
        Like ``map`` for functions returning a tuple of per-block numpy arrays.

        The tuple members are concatenated along axis 0 so the caller sees one result
        covering the whole batch.
        """
        parts = self.map(fn, batch)
        if not parts:
            return []
        return [np.concatenate([p[i] for p in parts], axis=0) for i in range(len(parts[0]))]
