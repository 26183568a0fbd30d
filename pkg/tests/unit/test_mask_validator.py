"""Unit tests for mask validation."""

import numpy as np
import pytest

from src.core.exceptions import DimensionError, FormatError
from src.core.types import SparsityPattern
from src.utils.mask_validator import MaskValidator
from src.utils.matrix_io import write_mask


class TestMaskValidator:
    """MaskValidator."""

    def setup_method(self):
        self.pattern = SparsityPattern(2, 4)
        # every row has 2 ones, the columns do not
        self.row_only = np.array([[1, 1, 0, 0]] * 4)

    def test_transposable_mask(self):
        mask = np.array([[1, 0, 1, 0], [0, 0, 1, 1], [1, 1, 0, 0], [0, 1, 0, 1]])
        valid, violations = MaskValidator(self.pattern, transposable=True).validate(mask)
        assert valid
        assert violations == []

    def test_row_check_only(self):
        valid, _ = MaskValidator(self.pattern).validate(self.row_only)
        assert valid

    def test_column_violations(self):
        valid, violations = MaskValidator(self.pattern, transposable=True).validate(self.row_only)
        assert not valid
        assert {v["axis"] for v in violations} == {"col"}
        assert sorted((v["col"], v["sum"]) for v in violations) == [(0, 4), (1, 4), (2, 0), (3, 0)]
        assert all(v["group"] == 0 for v in violations)

    def test_row_violation_location(self):
        mask = np.zeros((2, 8), dtype=int)
        mask[:, :2] = 1
        mask[:, 4:6] = 1
        mask[1, 6] = 1
        valid, violations = MaskValidator(self.pattern).validate(mask)
        assert not valid
        assert violations == [{"axis": "row", "row": 1, "group": 1, "sum": 3}]

    def test_at_most_accepts_underfull(self):
        mask = np.zeros((4, 4), dtype=int)
        mask[0, 0] = 1
        assert MaskValidator(self.pattern, transposable=True, at_most=True).validate(mask)[0]
        assert not MaskValidator(self.pattern, transposable=True).validate(mask)[0]

    def test_at_most_rejects_overfull(self):
        mask = np.ones((4, 4), dtype=int)
        valid, violations = MaskValidator(self.pattern, at_most=True).validate(mask)
        assert not valid
        assert len(violations) == 4

    def test_indivisible_columns(self):
        with pytest.raises(DimensionError):
            MaskValidator(self.pattern).validate(np.ones((4, 6)))

    def test_rows_only_checked_when_transposable(self):
        mask = np.array([[1, 1, 0, 0]] * 3)
        assert MaskValidator(self.pattern).validate(mask)[0]
        with pytest.raises(DimensionError):
            MaskValidator(self.pattern, transposable=True).validate(mask)

    def test_validate_file(self, temp_dir):
        path = temp_dir / "mask.tnm"
        write_mask(path, self.row_only)
        assert MaskValidator(self.pattern).validate_file(path)[0]
        assert not MaskValidator(self.pattern, transposable=True).validate_file(path)[0]

    def test_validate_file_rejects_garbage(self, temp_dir):
        path = temp_dir / "mask.tnm"
        path.write_bytes(b"not a mask file at all, just some text bytes")
        with pytest.raises(FormatError):
            MaskValidator(self.pattern).validate_file(path)
