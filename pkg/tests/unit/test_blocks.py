"""Unit tests for block partitioning, assembly, objectives and feasibility."""

import numpy as np
import pytest

from src.core.blocks import (
    assemble_mask,
    check_feasible,
    fill_rows_by_priority,
    group_topn_mask,
    mask_objective,
    partition_blocks,
)
from src.core.exceptions import DimensionError, ShapeError
from src.core.types import BinaryMaskBatch, BlockBatch, DenseMatrix, SparsityPattern

VALID_24 = [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]]


class TestPartition:
    """partition_blocks / assemble_mask."""

    def setup_method(self):
        self.pattern = SparsityPattern(2, 4)

    def test_row_major_tiles(self):
        values = np.arange(8 * 12, dtype=np.float64).reshape(8, 12) - 40.0
        batch = partition_blocks(DenseMatrix(values), self.pattern)
        assert batch.b == 6
        assert batch.origin.tolist() == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]]
        np.testing.assert_array_equal(batch.magnitudes[4], np.abs(values[4:8, 4:8]))
        assert batch.source_shape == (8, 12)

    def test_indivisible_dimensions(self):
        with pytest.raises(DimensionError):
            partition_blocks(DenseMatrix(np.ones((6, 8))), self.pattern)

    def test_assemble_places_blocks_back(self, rng):
        values = rng.standard_normal((8, 8))
        batch = partition_blocks(DenseMatrix(values), self.pattern)
        bits = batch.magnitudes > np.median(batch.magnitudes)
        full = assemble_mask(BinaryMaskBatch(bits), batch.origin, 8, 8)
        np.testing.assert_array_equal(full.values > 0.5, np.abs(values) > np.median(batch.magnitudes))

    def test_assemble_rejects_wrong_tile_count(self):
        mask = BinaryMaskBatch(np.array([VALID_24] * 3))
        with pytest.raises(ShapeError):
            assemble_mask(mask, np.array([[0, 0], [0, 1], [1, 0]]), 8, 8)

    def test_assemble_rejects_duplicate_origins(self):
        mask = BinaryMaskBatch(np.array([VALID_24] * 2))
        with pytest.raises(ShapeError):
            assemble_mask(mask, np.array([[0, 0], [0, 0]]), 4, 8)


class TestObjectiveAndFeasibility:
    """mask_objective / check_feasible."""

    def setup_method(self):
        self.pattern = SparsityPattern(2, 4)

    def test_objective_per_block(self, example_block):
        batch = BlockBatch.from_blocks(np.stack([example_block, 2 * example_block]))
        mask = BinaryMaskBatch(np.array([VALID_24, VALID_24]))
        report = mask_objective(batch, mask)
        first = 0.88 + 0.01 + 0.01 + 0.71 + 0.15 + 0.25 + 0.26 + 0.95
        assert report.per_block[0] == pytest.approx(first, abs=1e-12)
        assert report.per_block[1] == pytest.approx(2 * first, abs=1e-12)
        assert report.objective == pytest.approx(3 * first, abs=1e-12)

    def test_objective_shape_mismatch(self, example_block):
        batch = BlockBatch.from_blocks(example_block)
        with pytest.raises(ShapeError):
            mask_objective(batch, BinaryMaskBatch(np.ones((2, 4, 4), dtype=bool)))

    def test_feasible_mask(self):
        report = check_feasible(BinaryMaskBatch(np.array([VALID_24])), self.pattern)
        assert report
        assert report.violations == []

    def test_violations_are_listed(self):
        bits = np.array([VALID_24])
        bits[0, 0, 2] = 1
        report = check_feasible(BinaryMaskBatch(bits), self.pattern)
        assert not report
        assert [(v.axis, v.index, v.total) for v in report.violations] == [("row", 0, 3), ("col", 2, 3)]
        assert report.violations[0].to_dict() == {"block": 0, "axis": "row", "index": 0, "sum": 3}

    def test_at_most_accepts_underfull(self):
        bits = np.array([VALID_24])
        bits[0, 0, 0] = 0
        mask = BinaryMaskBatch(bits)
        assert not check_feasible(mask, self.pattern)
        assert check_feasible(mask, self.pattern, at_most=True)

    def test_block_side_mismatch(self):
        report = check_feasible(BinaryMaskBatch(np.ones((1, 2, 2), dtype=bool)), self.pattern)
        assert not report
        assert report.violations[0].axis == "shape"


class TestGroupSelection:
    """group_topn_mask / fill_rows_by_priority."""

    def test_topn_along_rows(self):
        values = np.array([[0.1, 0.9, 0.5, 0.3, 4.0, 1.0, 2.0, 3.0]])
        keep = group_topn_mask(values, 2, 4, axis=1)
        assert keep.astype(int).tolist() == [[0, 1, 1, 0, 1, 0, 0, 1]]

    def test_topn_ties_go_to_lower_index(self):
        keep = group_topn_mask(np.ones((1, 4)), 2, 4, axis=1)
        assert keep.astype(int).tolist() == [[1, 1, 0, 0]]

    def test_topn_along_columns(self):
        values = np.array([[1.0], [3.0], [2.0], [0.0]])
        keep = group_topn_mask(values, 1, 4, axis=0)
        assert keep[:, 0].tolist() == [False, True, False, False]

    def test_topn_indivisible(self):
        with pytest.raises(DimensionError):
            group_topn_mask(np.ones((2, 6)), 2, 4, axis=1)

    def test_fill_rows_is_always_feasible(self, rng):
        pattern = SparsityPattern(3, 8)
        masks = fill_rows_by_priority(rng.random((200, 8, 8)), pattern.n)
        assert check_feasible(BinaryMaskBatch(masks), pattern)

    def test_fill_rows_lexicographic_with_index_priority(self):
        priority = -np.arange(4, dtype=np.float64)[None, None, :].repeat(4, axis=1)
        masks = fill_rows_by_priority(priority, 2)
        assert masks[0].astype(int).tolist() == VALID_24
