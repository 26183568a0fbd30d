"""Unit tests for the core domain types."""

import numpy as np
import pytest

from src.core.exceptions import NumericalError, ShapeError
from src.core.types import BinaryMaskBatch, BlockBatch, DenseMatrix, SparsityPattern


class TestSparsityPattern:
    """Pattern parsing and validation."""

    def test_parse_valid(self):
        pattern = SparsityPattern.parse("2:4")
        assert pattern == SparsityPattern(2, 4)
        assert str(pattern) == "2:4"
        assert pattern.density == 0.5

    def test_parse_full_pattern(self):
        assert SparsityPattern.parse("4:4").density == 1.0

    @pytest.mark.parametrize("text", ["5:4", "0:4", "a:b", "2:4:8", "24", "2:1", ":4", "-1:4"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            SparsityPattern.parse(text)

    def test_rejects_bool_entries(self):
        with pytest.raises(ValueError):
            SparsityPattern(True, 4)


class TestDenseMatrix:
    """Finite 2-D float64 wrapper."""

    def test_values_are_read_only_copies(self):
        source = np.arange(6, dtype=np.float32).reshape(2, 3)
        matrix = DenseMatrix(source)
        assert matrix.values.dtype == np.float64
        assert matrix.shape == (2, 3)
        assert matrix.rows == 2 and matrix.cols == 3
        with pytest.raises(ValueError):
            matrix.values[0, 0] = 1.0
        source[0, 0] = 99
        assert matrix.values[0, 0] == 0.0

    def test_rejects_non_finite(self):
        with pytest.raises(NumericalError):
            DenseMatrix(np.array([[1.0, np.nan]]))
        with pytest.raises(NumericalError):
            DenseMatrix(np.array([[np.inf, 1.0]]))

    @pytest.mark.parametrize("shape", [(0, 3), (3, 0), (4,), (2, 2, 2)])
    def test_rejects_bad_shapes(self, shape):
        with pytest.raises(ShapeError):
            DenseMatrix(np.zeros(shape))


class TestBlockBatch:
    """Batched magnitude blocks."""

    def test_from_blocks_takes_absolute_values(self):
        batch = BlockBatch.from_blocks(-np.ones((3, 4, 4)))
        assert batch.b == 3
        assert batch.m == 4
        assert (batch.magnitudes == 1.0).all()
        assert batch.origin.tolist() == [[0, 0], [0, 1], [0, 2]]
        assert batch.source_shape == (4, 12)

    def test_single_block_is_promoted(self, example_block):
        assert BlockBatch.from_blocks(example_block).b == 1

    def test_rejects_negative_magnitudes(self):
        with pytest.raises(ValueError):
            BlockBatch(-np.ones((1, 2, 2)), np.zeros((1, 2)), (2, 2))

    def test_rejects_non_square_blocks(self):
        with pytest.raises(ShapeError):
            BlockBatch(np.ones((1, 2, 3)), np.zeros((1, 2)), (2, 3))

    def test_rejects_origin_count_mismatch(self):
        with pytest.raises(ShapeError):
            BlockBatch(np.ones((2, 2, 2)), np.zeros((1, 2)), (2, 4))

    def test_select_keeps_order(self):
        batch = BlockBatch.from_blocks(np.arange(5)[:, None, None] * np.ones((5, 2, 2)))
        sub = batch.select(1, 3)
        assert sub.b == 2
        assert sub.magnitudes[:, 0, 0].tolist() == [1.0, 2.0]
        assert sub.origin.tolist() == [[0, 1], [0, 2]]


class TestBinaryMaskBatch:
    """Per-block 0/1 masks."""

    def test_sums(self):
        bits = np.array([[[1, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 1]]])
        mask = BinaryMaskBatch(bits)
        assert mask.bits.dtype == np.bool_
        assert mask.row_sums().tolist() == [[2, 2, 2, 2]]
        assert mask.col_sums().tolist() == [[2, 2, 2, 2]]
        assert mask.complete is False

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            BinaryMaskBatch(np.full((1, 2, 2), 2))
