"""
ADAptation Feature Files
========================
Dense feature matrices on disk, bit-exact.

LAYOUT (little-endian):
    magic   8 bytes   b"ADAPTFV1"
    n       uint32    row count
    d       uint32    dimension
    payload n*d float32, row-major

File length is exactly 16 + 4*n*d bytes. Values are held in memory as
float64 (an exact widening), so write(read(f)) reproduces f byte for byte.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from guards import (
    BadMagic,
    DataIOError,
    DimensionMismatch,
    InvalidConfig,
    NonFinite,
    Truncated,
    require_finite,
)

logger = logging.getLogger("adaptation.dataio")

MAGIC = b"ADAPTFV1"
HEADER = struct.Struct("<8sII")
PAYLOAD_DTYPE = np.dtype("<f4")
_U32_MAX = 0xFFFFFFFF

PathLike = Union[str, Path]


@dataclass(frozen=True)
class FeatureMatrix:
    """n x d raw backbone features, one row per sample."""
    values: NDArray[np.float64]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionMismatch(f"feature matrix must be 2-D, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])

    def rows(self, index: ArrayLike) -> NDArray[np.float64]:
        return self.values[np.asarray(index, dtype=np.int64)]


def as_matrix(matrix: Union[FeatureMatrix, ArrayLike]) -> NDArray[np.float64]:
    if isinstance(matrix, FeatureMatrix):
        return matrix.values
    return np.asarray(matrix, dtype=np.float64)


def write_features(matrix: Union[FeatureMatrix, ArrayLike], path: PathLike) -> None:
    """Write ``matrix`` in the ADAPTFV1 layout."""
    values = as_matrix(matrix)
    if values.ndim != 2:
        raise DimensionMismatch(f"feature matrix must be 2-D, got shape {values.shape}")
    n, d = values.shape
    if d == 0:
        raise InvalidConfig("feature dimension d=0 is not allowed")
    if n > _U32_MAX or d > _U32_MAX:
        raise InvalidConfig(f"shape {values.shape} does not fit 32-bit counts")
    require_finite(values, "feature values")

    payload = np.ascontiguousarray(values, dtype=PAYLOAD_DTYPE)
    require_finite(payload, "feature values after float32 conversion")

    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(HEADER.pack(MAGIC, n, d))
            fh.write(payload.tobytes(order="C"))
    except OSError as exc:
        raise DataIOError(f"cannot write feature file {path}: {exc}") from exc
    logger.debug(f"Wrote {n}x{d} features to {path}")


def read_features(path: PathLike) -> FeatureMatrix:
    """Read an ADAPTFV1 file; rejects bad magic, size mismatch, non-finite values."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataIOError(f"cannot read feature file {path}: {exc}") from exc

    if len(data) >= len(MAGIC) and data[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"{path}: magic {data[:len(MAGIC)]!r} is not {MAGIC!r}")
    if len(data) < HEADER.size:
        raise Truncated(f"{path}: {len(data)} bytes is shorter than the {HEADER.size}-byte header")

    _, n, d = HEADER.unpack_from(data, 0)
    if d == 0:
        raise DimensionMismatch(f"{path}: header declares dimension 0")
    expected = HEADER.size + PAYLOAD_DTYPE.itemsize * n * d
    if len(data) != expected:
        raise Truncated(f"{path}: expected {expected} bytes for {n}x{d}, found {len(data)}")

    values = np.frombuffer(data, dtype=PAYLOAD_DTYPE, count=n * d, offset=HEADER.size)
    values = values.reshape(n, d).astype(np.float64)
    if not np.all(np.isfinite(values)):
        row = int(np.flatnonzero(~np.all(np.isfinite(values), axis=1))[0])
        raise NonFinite(f"{path}: non-finite value in row {row}")
    return FeatureMatrix(values)
