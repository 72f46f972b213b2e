"""
ADAptation Guards
=================
Error hierarchy and shared precondition checks.

Every failure the pipeline can signal is an ``AdaptationError`` subclass
with its own ``exit_code``; the CLI turns a caught error into that code.

GUARDS:
- Vectors and batches agree on dimension
- Arrays handed across module boundaries are finite
- Config values sit inside their documented ranges

Violations raise errors.
"""

from __future__ import annotations

from typing import Any, Dict, Type

import numpy as np


class AdaptationError(Exception):
    """Base class for every pipeline error."""

    exit_code: int = 2


# ═══════════════════════════════════════════════════════════════════════════════
# GEOMETRY / NETWORK
# ═══════════════════════════════════════════════════════════════════════════════

class DimensionMismatch(AdaptationError):
    exit_code = 10


class ZeroVector(AdaptationError):
    """Vector norm at or below the normalization floor."""
    exit_code = 11


class EmptyBatch(AdaptationError):
    exit_code = 12


class InvalidConfig(AdaptationError):
    """A config value or call argument violates its precondition."""
    exit_code = 13


class UnpairedSample(AdaptationError):
    exit_code = 20


class MissingReconPair(UnpairedSample):
    """External provider selected but a pool sample has no recon_row."""
    exit_code = 21


class NonFiniteLoss(AdaptationError):
    exit_code = 22


# ═══════════════════════════════════════════════════════════════════════════════
# CLUSTERING / SELECTION / PROXY
# ═══════════════════════════════════════════════════════════════════════════════

class TooFewSamples(AdaptationError):
    exit_code = 30


class DegenerateMean(AdaptationError):
    exit_code = 31


class TooFewCentroids(AdaptationError):
    exit_code = 32


class EmptyPool(AdaptationError):
    exit_code = 40


class UnknownDomain(AdaptationError):
    exit_code = 41


class EmptySet(AdaptationError):
    exit_code = 42


# ═══════════════════════════════════════════════════════════════════════════════
# DATA I/O
# ═══════════════════════════════════════════════════════════════════════════════

class BadMagic(AdaptationError):
    exit_code = 50


class Truncated(AdaptationError):
    exit_code = 51


class NonFinite(AdaptationError):
    exit_code = 52


class DataIOError(AdaptationError):
    """Underlying OS error while reading or writing a file."""
    exit_code = 53


class ParseError(AdaptationError):
    exit_code = 54


class DuplicateId(AdaptationError):
    exit_code = 55


class DanglingRowIndex(AdaptationError):
    exit_code = 56


class CheckpointMismatch(AdaptationError):
    exit_code = 57


# ═══════════════════════════════════════════════════════════════════════════════
# BENCHMARK
# ═══════════════════════════════════════════════════════════════════════════════

class BudgetExceedsPool(AdaptationError):
    exit_code = 60


class UnknownId(AdaptationError):
    exit_code = 61


def exit_code_table() -> Dict[str, int]:
    """Error class name -> exit code, for ``--help`` and docs."""
    table: Dict[str, int] = {}
    stack: list[Type[AdaptationError]] = [AdaptationError]
    while stack:
        cls = stack.pop()
        table[cls.__name__] = cls.exit_code
        stack.extend(cls.__subclasses__())
    return dict(sorted(table.items(), key=lambda kv: kv[1]))


# ═══════════════════════════════════════════════════════════════════════════════
# VALIDATION HELPERS
# ═══════════════════════════════════════════════════════════════════════════════

def require(condition: bool, message: str) -> None:
    """Raise InvalidConfig unless ``condition`` holds."""
    if not condition:
        raise InvalidConfig(message)


def require_same_dim(a: np.ndarray, b: np.ndarray, what: str = "vectors") -> None:
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatch(
            f"{what} disagree on dimension: {a.shape[-1]} vs {b.shape[-1]}"
        )


def require_finite(values: Any, what: str = "values") -> None:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr.ravel()))[0])
        raise NonFinite(f"{what} contain a non-finite entry at flat index {bad}")
