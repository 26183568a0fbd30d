"""
Domain types shared by every solver.

All types are frozen dataclasses wrapping read-only numpy arrays, so they can be
handed to worker threads without copying.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import NumericalError, ShapeError


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    """Return a read-only, C-contiguous copy of ``array`` with ``dtype``."""
    out = np.array(array, dtype=dtype, copy=True, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SparsityPattern:
    """The (N, M) pair: keep ``n`` weights out of every ``m`` consecutive ones."""

    n: int
    m: int

    def __post_init__(self):
        if isinstance(self.n, bool) or isinstance(self.m, bool):
            raise ValueError("Pattern entries must be integers")
        if int(self.n) != self.n or int(self.m) != self.m:
            raise ValueError(f"Pattern entries must be integers, got {self.n}:{self.m}")
        if self.m < 2:
            raise ValueError(f"Group size m must be at least 2, got {self.m}")
        if not 0 < self.n <= self.m:
            raise ValueError(f"Pattern requires 0 < n <= m, got {self.n}:{self.m}")

    @classmethod
    def parse(cls, text: str) -> "SparsityPattern":
        """Parse the ``"N:M"`` form, e.g. ``"2:4"``."""
        parts = text.strip().split(":")
        if len(parts) != 2:
            raise ValueError(f"Pattern must look like N:M, got {text!r}")
        try:
            n, m = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"Pattern must be numeric, got {text!r}") from None
        return cls(n, m)

    @property
    def density(self) -> float:
        return self.n / self.m

    def __str__(self) -> str:
        return f"{self.n}:{self.m}"


@dataclass(frozen=True)
class DenseMatrix:
    """A finite real matrix held in 64-bit precision."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
            raise ShapeError(f"DenseMatrix needs a non-empty 2-D array, got shape {values.shape}")
        values = _frozen(values, np.float64)
        if not np.isfinite(values).all():
            raise NumericalError("DenseMatrix entries must be finite (found NaN or Inf)")
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class BlockBatch:
    """
    ``b`` independent M×M magnitude blocks cut from one source matrix.

    Attributes:
        magnitudes: (b, m, m) array of |W| values
        origin: (b, 2) array of (block_row, block_col) tile indices
        source_shape: (rows, cols) of the matrix the blocks came from
    """

    magnitudes: np.ndarray
    origin: np.ndarray
    source_shape: Tuple[int, int]

    def __post_init__(self):
        magnitudes = _frozen(self.magnitudes, np.float64)
        if magnitudes.ndim != 3 or magnitudes.shape[1] != magnitudes.shape[2]:
            raise ShapeError(f"Block magnitudes must be (b, m, m), got {magnitudes.shape}")
        if not np.isfinite(magnitudes).all():
            raise NumericalError("Block magnitudes must be finite")
        if (magnitudes < 0).any():
            raise ValueError("Block magnitudes must be non-negative")
        origin = _frozen(self.origin, np.int64).reshape(-1, 2)
        if origin.shape[0] != magnitudes.shape[0]:
            raise ShapeError(
                f"Origin map has {origin.shape[0]} entries for {magnitudes.shape[0]} blocks"
            )
        object.__setattr__(self, "magnitudes", magnitudes)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "source_shape", (int(self.source_shape[0]), int(self.source_shape[1])))

    @classmethod
    def from_blocks(cls, blocks: np.ndarray) -> "BlockBatch":
        """Wrap free-standing blocks (no source matrix) laid out in a single tile row."""
        blocks = np.abs(np.asarray(blocks, dtype=np.float64))
        if blocks.ndim == 2:
            blocks = blocks[None]
        b, m = blocks.shape[0], blocks.shape[1]
        origin = np.stack([np.zeros(b, dtype=np.int64), np.arange(b, dtype=np.int64)], axis=1)
        return cls(blocks, origin, (m, b * m))

    @property
    def b(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def m(self) -> int:
        return self.magnitudes.shape[1]

    def select(self, start: int, stop: int) -> "BlockBatch":
        """Contiguous sub-batch ``[start, stop)``; keeps the source shape."""
        return BlockBatch(self.magnitudes[start:stop], self.origin[start:stop], self.source_shape)


@dataclass(frozen=True)
class BinaryMaskBatch:
    """
    One 0/1 mask per block.

    ``complete`` is True once every row and column of every block holds exactly N
    ones; during greedy construction sums are only bounded by N.
    """

    bits: np.ndarray
    complete: bool = False

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim == 2:
            bits = bits[None]
        if bits.ndim != 3 or bits.shape[1] != bits.shape[2]:
            raise ShapeError(f"Mask bits must be (b, m, m), got {bits.shape}")
        if bits.dtype != np.bool_:
            if not np.isin(bits, (0, 1)).all():
                raise ValueError("Mask bits must be 0 or 1")
        object.__setattr__(self, "bits", _frozen(bits, np.bool_))

    @property
    def b(self) -> int:
        return self.bits.shape[0]

    @property
    def m(self) -> int:
        return self.bits.shape[1]

    def row_sums(self) -> np.ndarray:
        return self.bits.sum(axis=2)

    def col_sums(self) -> np.ndarray:
        return self.bits.sum(axis=1)


@dataclass(frozen=True)
class MaskObjectiveReport:
    """Σ S_ij |W_ij| per block and in total (fixed ascending block order)."""

    objective: float
    per_block: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "per_block", _frozen(self.per_block, np.float64))
