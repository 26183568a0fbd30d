"""Unit tests for the block-parallel executor."""

import os

import numpy as np
import pytest

from src.core.executor import MIN_BLOCKS_PER_CHUNK, BlockExecutor, resolve_workers
from src.core.types import BlockBatch


class TestBlockExecutor:
    """Chunking and ordered reassembly."""

    def setup_method(self):
        self.batch = BlockBatch.from_blocks(np.arange(100)[:, None, None] * np.ones((100, 2, 2)))

    def test_resolve_workers(self):
        assert resolve_workers(3) == 3
        assert resolve_workers(0) == (os.cpu_count() or 1)
        assert resolve_workers(None) == (os.cpu_count() or 1)
        with pytest.raises(ValueError):
            resolve_workers(-1)

    def test_chunks_cover_range_contiguously(self):
        spans = BlockExecutor(4).chunks(100)
        assert len(spans) == 4
        assert [i for span in spans for i in span] == list(range(100))

    def test_small_batches_stay_in_one_chunk(self):
        assert len(BlockExecutor(8).chunks(MIN_BLOCKS_PER_CHUNK)) == 1
        assert BlockExecutor(8).chunks(0) == []

    def test_map_passes_global_offsets(self):
        offsets = BlockExecutor(4).map(lambda sub, offset: (offset, sub.b), self.batch)
        assert [o for o, _ in offsets] == [0, 25, 50, 75]
        assert sum(b for _, b in offsets) == 100

    @pytest.mark.parametrize("workers", [1, 3, 8])
    def test_map_arrays_is_worker_independent(self, workers):
        def fn(sub, offset):
            return (sub.magnitudes[:, 0, 0] * 2, np.arange(sub.b) + offset)

        doubled, index = BlockExecutor(workers).map_arrays(fn, self.batch)
        np.testing.assert_array_equal(doubled, np.arange(100) * 2.0)
        np.testing.assert_array_equal(index, np.arange(100))
