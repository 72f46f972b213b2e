"""
ADAptation Hypersphere Geometry
===============================
Unit-sphere primitives shared by every other package.

PURPOSE:
- Project vectors onto the unit hypersphere
- Measure angular (spherical) distance
- Angular contrastive loss and its analytic gradient

Gradients are taken with respect to PRE-normalization activations, so the
L2 normalization is part of the differentiated graph.

All functions are pure; safe to call from any thread.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from guards import DimensionMismatch, EmptyBatch, InvalidConfig, ZeroVector, require_same_dim

# A 1-D float64 array with L2 norm 1 (within 1e-6).
UnitEmbedding = NDArray[np.float64]

DEFAULT_EMBED_DIM = 256
NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class LossConfig:
    """Angular contrastive loss settings."""
    m: float = 4.0            # angular scaling factor
    eps_clamp: float = 1e-7   # cosine clamp margin away from +/-1

    def __post_init__(self):
        if not self.m > 0:
            raise InvalidConfig(f"loss scaling m must be > 0, got {self.m}")
        if not 0 < self.eps_clamp < 1e-3:
            raise InvalidConfig(f"eps_clamp must lie in (0, 1e-3), got {self.eps_clamp}")


DEFAULT_LOSS = LossConfig()


# ─────────────────────────────────────────────────────────────────────────────
# NORMALIZATION
# ─────────────────────────────────────────────────────────────────────────────

def normalize(v: ArrayLike) -> UnitEmbedding:
    """Scale ``v`` to unit L2 norm."""
    vec = np.asarray(v, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] < 2:
        raise DimensionMismatch(f"expected a vector of dimension >= 2, got shape {vec.shape}")
    norm = float(np.linalg.norm(vec))
    if not norm > NORM_FLOOR:
        raise ZeroVector(f"cannot normalize vector with norm {norm:.3e}")
    return vec / norm


def normalize_rows(matrix: ArrayLike) -> NDArray[np.float64]:
    """Row-wise ``normalize``; raises ZeroVector naming the first bad row."""
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] < 2:
        raise DimensionMismatch(f"expected an (n, d>=2) matrix, got shape {mat.shape}")
    norms = np.linalg.norm(mat, axis=1)
    bad = np.flatnonzero(~(norms > NORM_FLOOR))
    if bad.size:
        raise ZeroVector(f"row {int(bad[0])} has norm {norms[bad[0]]:.3e}")
    return mat / norms[:, None]


def is_unit(v: ArrayLike, tol: float = 1e-6) -> bool:
    return abs(float(np.linalg.norm(np.asarray(v, dtype=np.float64))) - 1.0) <= tol


# ─────────────────────────────────────────────────────────────────────────────
# DISTANCE
# ─────────────────────────────────────────────────────────────────────────────

def clamp_cosine(cos: ArrayLike, eps_clamp: float = DEFAULT_LOSS.eps_clamp) -> NDArray[np.float64]:
    return np.clip(np.asarray(cos, dtype=np.float64), -1.0 + eps_clamp, 1.0 - eps_clamp)


def spherical_distance(
    a: UnitEmbedding,
    b: UnitEmbedding,
    eps_clamp: float = DEFAULT_LOSS.eps_clamp,
) -> float:
    """arccos of the clamped dot product; in [0, pi], symmetric."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"spherical_distance needs equal 1-D shapes, got {a.shape} and {b.shape}")
    return float(np.arccos(clamp_cosine(np.dot(a, b), eps_clamp)))


def angles_between(
    z: UnitEmbedding,
    centers: NDArray[np.float64],
    eps_clamp: float = DEFAULT_LOSS.eps_clamp,
) -> NDArray[np.float64]:
    """Spherical distance from ``z`` to every row of ``centers``, in row order."""
    z = np.asarray(z, dtype=np.float64)
    require_same_dim(z, centers, "embedding and centers")
    return np.arccos(clamp_cosine(centers @ z, eps_clamp))


# ─────────────────────────────────────────────────────────────────────────────
# ANGULAR CONTRASTIVE LOSS
# ─────────────────────────────────────────────────────────────────────────────

def _check_batches(f_batch: ArrayLike, g_batch: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    f = np.atleast_2d(np.asarray(f_batch, dtype=np.float64))
    g = np.atleast_2d(np.asarray(g_batch, dtype=np.float64))
    if f.shape[0] == 0 or g.shape[0] == 0 or f.size == 0:
        raise EmptyBatch("angular loss needs a nonempty batch")
    if f.shape != g.shape:
        raise DimensionMismatch(f"batches differ in shape: {f.shape} vs {g.shape}")
    return f, g


def pair_cosines(f_batch: ArrayLike, g_batch: ArrayLike) -> NDArray[np.float64]:
    """Row-wise cosine similarity f_i.g_i / (|f_i| |g_i|)."""
    f, g = _check_batches(f_batch, g_batch)
    return np.sum(f * g, axis=1) / (np.linalg.norm(f, axis=1) * np.linalg.norm(g, axis=1))


def angular_loss(
    f_batch: ArrayLike,
    g_batch: ArrayLike,
    cfg: LossConfig = DEFAULT_LOSS,
) -> float:
    """
    Mean over the batch of (m * arccos(cos(f_i, g_i)))^2.

    The cosine is clamped to [-1+eps, 1-eps], so identical pairs give the
    clamp floor (m * arccos(1-eps))^2 instead of exactly 0.
    """
    cos = clamp_cosine(pair_cosines(f_batch, g_batch), cfg.eps_clamp)
    return float(np.mean((cfg.m * np.arccos(cos)) ** 2))


def loss_floor(cfg: LossConfig = DEFAULT_LOSS) -> float:
    """Per-pair loss of two identical vectors under clamping."""
    return float((cfg.m * np.arccos(1.0 - cfg.eps_clamp)) ** 2)


def angular_loss_grad_batch(
    f_raw: ArrayLike,
    g_raw: ArrayLike,
    cfg: LossConfig = DEFAULT_LOSS,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Gradient of ``angular_loss`` (batch mean) w.r.t. the pre-normalization rows.

    With s = f^.g^ and L_i = (m arccos s)^2:
        dL_i/ds   = -2 m^2 arccos(s) / sqrt(1 - s^2)
        dL_i/df   = dL_i/ds * (I - f^ f^T) g^ / |f|
    Outside the clamp interval the clamped cosine is constant, so the
    gradient there is zero.
    """
    f, g = _check_batches(f_raw, g_raw)
    f_norm = np.linalg.norm(f, axis=1)
    g_norm = np.linalg.norm(g, axis=1)
    if np.any(~(f_norm > NORM_FLOOR)) or np.any(~(g_norm > NORM_FLOOR)):
        raise ZeroVector("angular loss gradient undefined for a zero-norm row")
    f_hat = f / f_norm[:, None]
    g_hat = g / g_norm[:, None]
    s = np.sum(f_hat * g_hat, axis=1)

    lo, hi = -1.0 + cfg.eps_clamp, 1.0 - cfg.eps_clamp
    inside = (s > lo) & (s < hi)
    s_c = np.clip(s, lo, hi)
    dl_ds = np.where(inside, -2.0 * cfg.m ** 2 * np.arccos(s_c) / np.sqrt(1.0 - s_c ** 2), 0.0)
    dl_ds = dl_ds / f.shape[0]

    grad_f = (dl_ds / f_norm)[:, None] * (g_hat - s[:, None] * f_hat)
    grad_g = (dl_ds / g_norm)[:, None] * (f_hat - s[:, None] * g_hat)
    return grad_f, grad_g


def angular_loss_grad(
    f: ArrayLike,
    g: ArrayLike,
    cfg: LossConfig = DEFAULT_LOSS,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Single-pair gradient w.r.t. the pre-normalization vectors of f and g."""
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.ndim != 1 or g.ndim != 1:
        raise DimensionMismatch("angular_loss_grad takes two 1-D vectors")
    grad_f, grad_g = angular_loss_grad_batch(f[None, :], g[None, :], cfg)
    return grad_f[0], grad_g[0]
