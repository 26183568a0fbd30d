"""
Matrix and mask files.

TNM1 layout (all integers little-endian):

    offset  size  field
    0       4     magic b"TNM1"
    4       1     dtype: 0 = float32, 1 = float64, 2 = uint8 mask
    5       3     reserved, zero
    8       8     rows (u64)
    16      8     cols (u64)
    24      ...   rows × cols values, row-major, little-endian

CSV input is rectangular, numeric, headerless.
"""

import csv
import logging
import math
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..core.exceptions import FormatError, IoError, ParseError
from ..core.types import DenseMatrix

logger = logging.getLogger(__name__)

MAGIC = b"TNM1"
HEADER = struct.Struct("<4sB3sQQ")

DTYPE_FLOAT32 = 0
DTYPE_FLOAT64 = 1
DTYPE_MASK = 2

_NUMPY_DTYPES = {
    DTYPE_FLOAT32: np.dtype("<f4"),
    DTYPE_FLOAT64: np.dtype("<f8"),
    DTYPE_MASK: np.dtype("u1"),
}
_DTYPE_NAMES = {"float32": DTYPE_FLOAT32, "float64": DTYPE_FLOAT64}

PathLike = Union[str, Path]


def _read_bytes(path: PathLike) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"Cannot read {path}: {e.strerror or e}") from e


def _write_bytes(path: PathLike, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e.strerror or e}") from e


def _decode(data: bytes, path: PathLike):
    if len(data) < HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, dtype, reserved, rows, cols = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if dtype not in _NUMPY_DTYPES:
        raise FormatError(f"{path}: unknown dtype code {dtype}")
    if reserved != b"\x00\x00\x00":
        raise FormatError(f"{path}: reserved header bytes must be zero")
    if rows == 0 or cols == 0:
        raise FormatError(f"{path}: empty matrix {rows}x{cols}")
    np_dtype = _NUMPY_DTYPES[dtype]
    expected = rows * cols * np_dtype.itemsize
    payload = len(data) - HEADER.size
    if payload != expected:
        kind = "truncated" if payload < expected else "oversized"
        raise FormatError(f"{path}: {kind} payload, {payload} bytes for {rows}x{cols} ({expected} expected)")
    values = np.frombuffer(data, dtype=np_dtype, count=rows * cols, offset=HEADER.size)
    return dtype, values.reshape(rows, cols)


def _encode(values: np.ndarray, dtype: int) -> bytes:
    rows, cols = values.shape
    header = HEADER.pack(MAGIC, dtype, b"\x00\x00\x00", rows, cols)
    return header + np.ascontiguousarray(values, dtype=_NUMPY_DTYPES[dtype]).tobytes()


def read_matrix(path: PathLike) -> DenseMatrix:
    """
    Read a TNM1 file as a 64-bit matrix (float32 payloads are widened, masks become 0/1).

    Raises:
        FormatError: bad magic, dtype, reserved bytes or payload length
        IoError: the file cannot be read
    """
    dtype, values = _decode(_read_bytes(path), path)
    if dtype == DTYPE_MASK:
        _check_mask_values(values, path)
    logger.debug(f"Read {values.shape[0]}x{values.shape[1]} matrix from {path}")
    return DenseMatrix(values.astype(np.float64))


def write_matrix(path: PathLike, matrix: DenseMatrix, dtype: str = "float64") -> None:
    """Write ``matrix`` as float64 (default) or float32 TNM1."""
    if dtype not in _DTYPE_NAMES:
        raise ValueError(f"dtype must be one of {', '.join(_DTYPE_NAMES)}, got {dtype!r}")
    _write_bytes(path, _encode(matrix.values, _DTYPE_NAMES[dtype]))


def _check_mask_values(values: np.ndarray, path: PathLike) -> None:
    bad = np.flatnonzero(values.reshape(-1) > 1)
    if bad.size:
        r, c = divmod(int(bad[0]), values.shape[1])
        raise FormatError(f"{path}: mask value {int(values[r, c])} at ({r}, {c}) is not 0 or 1")


def read_mask(path: PathLike) -> np.ndarray:
    """
    Read a uint8 TNM1 mask as a boolean array.

    Raises:
        FormatError: wrong dtype or a value other than 0/1
    """
    dtype, values = _decode(_read_bytes(path), path)
    if dtype != DTYPE_MASK:
        raise FormatError(f"{path}: expected a mask file (dtype 2), found dtype {dtype}")
    _check_mask_values(values, path)
    return values.astype(bool)


def write_mask(path: PathLike, mask: Union[np.ndarray, DenseMatrix]) -> None:
    """Write a 0/1 matrix as a uint8 TNM1 mask."""
    values = mask.values if isinstance(mask, DenseMatrix) else np.asarray(mask)
    if values.ndim != 2:
        raise ValueError(f"Mask must be 2-D, got shape {values.shape}")
    if not np.isin(values, (0, 1)).all():
        raise ValueError("Mask entries must be 0 or 1")
    _write_bytes(path, _encode(values.astype(np.uint8), DTYPE_MASK))


def read_csv(path: PathLike) -> DenseMatrix:
    """
    Parse a headerless numeric CSV (scientific notation allowed, blank lines ignored).

    Raises:
        ParseError: non-numeric field, non-finite value or ragged row (1-based location)
        IoError: the file cannot be read
    """
    try:
        with open(path, newline="") as handle:
            records = list(csv.reader(handle))
    except OSError as e:
        raise IoError(f"Cannot read {path}: {e.strerror or e}") from e

    rows = []
    width = None
    for line_no, record in enumerate(records, start=1):
        if not record or all(not field.strip() for field in record):
            continue
        if width is None:
            width = len(record)
        elif len(record) != width:
            raise ParseError(f"{path}: expected {width} fields, found {len(record)}", line_no)
        values = []
        for col_no, text in enumerate(record, start=1):
            try:
                value = float(text.strip())
            except ValueError:
                raise ParseError(f"{path}: not a number: {text.strip()!r}", line_no, col_no) from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: non-finite value {text.strip()!r}", line_no, col_no)
            values.append(value)
        rows.append(values)

    if not rows:
        raise ParseError(f"{path}: no data", 1)
    return DenseMatrix(np.array(rows, dtype=np.float64))


def write_csv(path: PathLike, matrix: DenseMatrix) -> None:
    """Write ``matrix`` as CSV with round-trip float formatting."""
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            for row in matrix.values:
                writer.writerow([repr(float(v)) for v in row])
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e.strerror or e}") from e


def load_input(path: PathLike) -> DenseMatrix:
    """Read ``.csv`` files as CSV and everything else as TNM1."""
    if Path(path).suffix.lower() == ".csv":
        return read_csv(path)
    return read_matrix(path)
