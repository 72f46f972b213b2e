"""
ADAptation Selector
===================
Single-pass top-alpha% selection over the multi-domain unlabeled pool.

Every pool sample is scored against the fitted centroids and its paired
reconstruction, the pool is sorted ascending by (informativeness, id) and
the first max(1, floor(alpha/100 * N)) samples are selected.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Set, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike

from clustering import ClusterModel, angles_to_centroids
from geometry import ordered_map
from guards import DataIOError, DimensionMismatch, DuplicateId, EmptyPool, UnpairedSample

from .scoring import (
    ScoringConfig,
    informativeness,
    representativeness_score,
    selection_count,
    uncertainty_score,
)

logger = logging.getLogger("adaptation.selection")

SELECTION_HEADER = ["id", "domain", "uncertainty", "representativeness", "informativeness", "rank", "selected"]


@dataclass(frozen=True)
class SelectionRow:
    id: str
    domain: str
    uncertainty: float
    representativeness: float
    informativeness: float
    rank: int
    selected: bool


@dataclass
class SelectionReport:
    """Rows in rank order (rank 0 = most informative) plus the config used."""
    rows: List[SelectionRow]
    config: ScoringConfig
    n: int

    def selected_ids(self) -> List[str]:
        return [row.id for row in self.rows if row.selected]

    def selected_set(self) -> Set[str]:
        return set(self.selected_ids())


def _score_row(z_u: np.ndarray, z_r: np.ndarray, model: ClusterModel, cfg: ScoringConfig) -> Tuple[float, float]:
    thetas = angles_to_centroids(model, z_u)
    return uncertainty_score(thetas, cfg.uncertainty_mode), representativeness_score(z_u, z_r)


def select(
    ids: Sequence[str],
    domains: Sequence[str],
    z_u: ArrayLike,
    z_r: ArrayLike,
    model: ClusterModel,
    cfg: ScoringConfig,
    threads: int = 1,
) -> SelectionReport:
    """Score every pool sample and flag the top alpha% (lowest informativeness)."""
    ids = [str(x) for x in ids]
    n = len(ids)
    if n == 0:
        raise EmptyPool("selection pool is empty")
    if len(set(ids)) != n:
        raise DuplicateId("selection pool contains duplicate sample ids")
    if len(domains) != n:
        raise UnpairedSample(f"{len(domains)} domain tags for {n} samples")
    zu = np.asarray(z_u, dtype=np.float64)
    zr = np.asarray(z_r, dtype=np.float64)
    if zu.ndim != 2 or zu.shape[0] != n:
        raise UnpairedSample(f"expected {n} pool embeddings, got shape {zu.shape}")
    if zr.ndim != 2 or zr.shape[0] != n:
        paired = zr.shape[0] if zr.ndim == 2 else 0
        raise UnpairedSample(
            f"pool has {n} samples but {paired} reconstruction embeddings"
            + (f" (first unpaired: {ids[paired]})" if paired < n else "")
        )
    if zu.shape[1] != zr.shape[1] or zu.shape[1] != model.embed_dim:
        raise DimensionMismatch(
            f"pool {zu.shape[1]}-d, reconstructions {zr.shape[1]}-d, centroids {model.embed_dim}-d"
        )

    scores = ordered_map(lambda i: _score_row(zu[i], zr[i], model, cfg), range(n), threads)
    u = np.array([s[0] for s in scores])
    r = np.array([s[1] for s in scores])
    info = np.atleast_1d(informativeness(u, r, cfg))

    order = sorted(range(n), key=lambda i: (float(info[i]), ids[i]))
    budget = selection_count(cfg.alpha_percent, n)
    rows = [
        SelectionRow(
            id=ids[i],
            domain=str(domains[i]),
            uncertainty=float(u[i]),
            representativeness=float(r[i]),
            informativeness=float(info[i]),
            rank=rank,
            selected=rank < budget,
        )
        for rank, i in enumerate(order)
    ]
    logger.info(
        f"Selected {budget}/{n} samples (alpha {cfg.alpha_percent}%, "
        f"{cfg.uncertainty_mode}/{cfg.combine_mode}, omega {cfg.omega})"
    )
    return SelectionReport(rows=rows, config=cfg, n=n)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_selection_csv(report: SelectionReport, path: Union[str, Path]) -> None:
    """CSV in rank order; reals in radians with 9 significant digits."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SELECTION_HEADER)
            for row in report.rows:
                writer.writerow([
                    row.id,
                    row.domain,
                    _fmt(row.uncertainty),
                    _fmt(row.representativeness),
                    _fmt(row.informativeness),
                    row.rank,
                    int(row.selected),
                ])
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote selection report ({report.n} rows) to {path}")
