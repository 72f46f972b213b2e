"""
ADAptation Scoring
==================
Per-sample scores that rank the unlabeled pool.

    uncertainty       closeness of the sample's centroid angles
                      (smaller -> more ambiguous cluster membership)
    representativeness angular distance between a sample's embedding and
                      the embedding of its reconstruction
    informativeness   uncertainty + omega * representativeness
                      (raw values, or pool ranks in rank mode)

Lower informativeness ranks first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import rankdata

from geometry import spherical_distance
from guards import InvalidConfig, TooFewCentroids, require_finite

UncertaintyMode = Literal["pairwise_min", "range"]
CombineMode = Literal["raw", "rank"]

UNCERTAINTY_MODES = ("pairwise_min", "range")
COMBINE_MODES = ("raw", "rank")


@dataclass(frozen=True)
class ScoringConfig:
    omega: float = 1.0
    uncertainty_mode: UncertaintyMode = "pairwise_min"
    combine_mode: CombineMode = "raw"
    alpha_percent: float = 20.0

    def __post_init__(self):
        if not math.isfinite(self.omega):
            raise InvalidConfig(f"omega must be finite, got {self.omega}")
        if self.uncertainty_mode not in UNCERTAINTY_MODES:
            raise InvalidConfig(f"uncertainty_mode must be one of {UNCERTAINTY_MODES}, got {self.uncertainty_mode!r}")
        if self.combine_mode not in COMBINE_MODES:
            raise InvalidConfig(f"combine_mode must be one of {COMBINE_MODES}, got {self.combine_mode!r}")
        if not 0 < self.alpha_percent < 100:
            raise InvalidConfig(f"alpha_percent must lie in (0, 100), got {self.alpha_percent}")


def uncertainty_score(thetas: ArrayLike, mode: UncertaintyMode = "pairwise_min") -> float:
    """
    pairwise_min: min over p != q of |theta_p - theta_q|
    range:        max(theta) - min(theta)
    """
    theta = np.asarray(thetas, dtype=np.float64).ravel()
    if theta.shape[0] < 2:
        raise TooFewCentroids(f"uncertainty needs at least 2 centroid angles, got {theta.shape[0]}")
    require_finite(theta, "centroid angles")
    ordered = np.sort(theta)
    if mode == "pairwise_min":
        # the closest pair is always adjacent once sorted
        return float(np.min(np.diff(ordered)))
    if mode == "range":
        return float(ordered[-1] - ordered[0])
    raise InvalidConfig(f"unknown uncertainty_mode {mode!r}")


def representativeness_score(z_u: ArrayLike, z_r: ArrayLike) -> float:
    return spherical_distance(z_u, z_r)


def informativeness(
    u: Union[float, ArrayLike],
    r: Union[float, ArrayLike],
    cfg: ScoringConfig,
) -> Union[float, NDArray[np.float64]]:
    """
    Combine uncertainty and representativeness.

    Arrays are treated as the whole pool, which rank mode needs: ranks are
    ascending from 0 with ties sharing their average rank.
    """
    scalar = np.ndim(u) == 0 and np.ndim(r) == 0
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if u_arr.shape != r_arr.shape:
        raise InvalidConfig(f"u and r differ in shape: {u_arr.shape} vs {r_arr.shape}")
    require_finite(u_arr, "uncertainty scores")
    require_finite(r_arr, "representativeness scores")

    if cfg.combine_mode == "raw":
        combined = u_arr + cfg.omega * r_arr
    else:
        combined = (rankdata(u_arr, method="average") - 1.0) + cfg.omega * (rankdata(r_arr, method="average") - 1.0)
    return float(combined[0]) if scalar else combined


def selection_count(alpha_percent: float, n: int) -> int:
    """max(1, floor(alpha/100 * n)) for a nonempty pool, computed exactly."""
    if not 0 < alpha_percent <= 100:
        raise InvalidConfig(f"alpha_percent must lie in (0, 100], got {alpha_percent}")
    if n <= 0:
        return 0
    return max(1, math.floor(Fraction(str(alpha_percent)) * n / 100))
