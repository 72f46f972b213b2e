"""
ADAptation Projection Head
==========================
Two-layer MLP with manual backpropagation.

    x  -> x / |x|                      (features placed on the sphere)
       -> h = x W1 + b1 -> relu
       -> o = a W2 + b2 -> o / |o|     (unit embedding)

Parameters are plain numpy arrays; no autodiff. The backward pass returns
gradients with the same layout as the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from geometry import UnitEmbedding, normalize, normalize_rows
from guards import DimensionMismatch, InvalidConfig, require_finite

PARAM_NAMES: Tuple[str, ...] = ("w1", "b1", "w2", "b2")
OUTPUT_BIAS_SCALE = 0.01


@dataclass
class MlpParams:
    """Weights and biases for input_dim -> hidden_dim -> embed_dim."""
    w1: NDArray[np.float64]
    b1: NDArray[np.float64]
    w2: NDArray[np.float64]
    b2: NDArray[np.float64]

    def __post_init__(self):
        for name in PARAM_NAMES:
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if (
            self.w1.ndim != 2 or self.w2.ndim != 2
            or self.b1.shape != (self.w1.shape[1],)
            or self.w2.shape[0] != self.w1.shape[1]
            or self.b2.shape != (self.w2.shape[1],)
        ):
            raise DimensionMismatch(
                f"inconsistent MLP shapes: w1 {self.w1.shape}, b1 {self.b1.shape}, "
                f"w2 {self.w2.shape}, b2 {self.b2.shape}"
            )

    @property
    def input_dim(self) -> int:
        return int(self.w1.shape[0])

    @property
    def hidden_dim(self) -> int:
        return int(self.w1.shape[1])

    @property
    def embed_dim(self) -> int:
        return int(self.w2.shape[1])

    def items(self) -> Iterator[Tuple[str, NDArray[np.float64]]]:
        for name in PARAM_NAMES:
            yield name, getattr(self, name)

    def to_arrays(self, prefix: str = "") -> Dict[str, NDArray[np.float64]]:
        return {f"{prefix}{name}": arr for name, arr in self.items()}

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray], prefix: str = "") -> "MlpParams":
        return cls(**{name: arrays[f"{prefix}{name}"] for name in PARAM_NAMES})

    def copy(self) -> "MlpParams":
        return MlpParams(**{name: arr.copy() for name, arr in self.items()})

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(arr))) for _, arr in self.items())


def init_params(
    input_dim: int,
    hidden_dim: int,
    embed_dim: int,
    rng: np.random.Generator,
) -> MlpParams:
    """Scaled-normal fan-in initialization (He for the ReLU layer).

    The hidden bias starts at zero. The output bias gets a small seeded draw
    so a row whose hidden units are all inactive still embeds to a unit
    vector instead of a zero one.
    """
    if min(input_dim, hidden_dim) < 1 or embed_dim < 2:
        raise InvalidConfig(
            f"bad MLP shape ({input_dim}, {hidden_dim}, {embed_dim}); embed_dim must be >= 2"
        )
    w1 = rng.standard_normal((input_dim, hidden_dim)) * np.sqrt(2.0 / input_dim)
    w2 = rng.standard_normal((hidden_dim, embed_dim)) * np.sqrt(1.0 / hidden_dim)
    b2 = rng.standard_normal(embed_dim) * OUTPUT_BIAS_SCALE
    return MlpParams(w1=w1, b1=np.zeros(hidden_dim), w2=w2, b2=b2)


def forward(params: MlpParams, features: ArrayLike) -> UnitEmbedding:
    """Embed one raw feature vector onto the unit hypersphere."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != params.input_dim:
        raise DimensionMismatch(f"features have shape {x.shape}, head expects ({params.input_dim},)")
    x_hat = normalize(x)
    a = np.maximum(x_hat @ params.w1 + params.b1, 0.0)
    return normalize(a @ params.w2 + params.b2)


# ─────────────────────────────────────────────────────────────────────────────
# BATCH PASSES (training)
# ─────────────────────────────────────────────────────────────────────────────

@dataclass
class ForwardCache:
    x_hat: NDArray[np.float64]
    h: NDArray[np.float64]
    a: NDArray[np.float64]
    out: NDArray[np.float64]   # pre-normalization output


def normalize_inputs(features: ArrayLike, params: MlpParams) -> NDArray[np.float64]:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.input_dim:
        raise DimensionMismatch(f"feature batch has shape {x.shape}, head expects (n, {params.input_dim})")
    return normalize_rows(x)


def forward_batch(params: MlpParams, x_hat: NDArray[np.float64]) -> ForwardCache:
    """Pre-normalization outputs for already-normalized inputs."""
    h = x_hat @ params.w1 + params.b1
    a = np.maximum(h, 0.0)
    return ForwardCache(x_hat=x_hat, h=h, a=a, out=a @ params.w2 + params.b2)


def backward(params: MlpParams, cache: ForwardCache, d_out: NDArray[np.float64]) -> MlpParams:
    """Gradients of the loss w.r.t. every parameter, given dL/d(out)."""
    d_w2 = cache.a.T @ d_out
    d_b2 = d_out.sum(axis=0)
    d_a = d_out @ params.w2.T
    d_h = d_a * (cache.h > 0.0)
    d_w1 = cache.x_hat.T @ d_h
    d_b1 = d_h.sum(axis=0)
    grads = MlpParams(w1=d_w1, b1=d_b1, w2=d_w2, b2=d_b2)
    require_finite(d_out, "output gradients")
    return grads
