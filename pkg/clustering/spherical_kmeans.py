"""
ADAptation Spherical K-Means
============================
Lloyd iterations on the unit hypersphere.

    assign  : each embedding -> centroid of maximum cosine similarity
              (ties -> lowest centroid index)
    update  : centroid <- normalized sum of its members
    objective: mean angular distance to the assigned centroid

Seeding is k-means++ with squared angular distance weights. Empty clusters
are refilled with the sample farthest from its own centroid. The objective
history starts at the first update; a step whose objective would rise above
the last recorded value is discarded and iteration stops there.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dataio import read_checkpoint, write_checkpoint
from geometry import (
    NORM_FLOOR,
    angles_between,
    clamp_cosine,
    normalize,
    ordered_map,
    row_chunks,
)
from guards import CheckpointMismatch, DimensionMismatch, InvalidConfig, TooFewSamples

logger = logging.getLogger("adaptation.clustering")

CLUSTER_KIND = "cluster_model"


@dataclass(frozen=True)
class ClusterConfig:
    k: int = 4
    seed: int = 0
    max_iters: int = 100
    tol: float = 1e-6

    def __post_init__(self):
        if self.k < 1:
            raise InvalidConfig(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise InvalidConfig(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol >= 0:
            raise InvalidConfig(f"tol must be >= 0, got {self.tol}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass
class ClusterModel:
    """k unit centroids, per-sample assignments and the objective trace."""
    centroids: NDArray[np.float64]
    assignments: NDArray[np.int64]
    objective_history: List[float] = field(default_factory=list)
    k: int = 4
    seed: int = 0
    n_iter: int = 0

    @property
    def embed_dim(self) -> int:
        return int(self.centroids.shape[1])


# ─────────────────────────────────────────────────────────────────────────────
# INTERNALS
# ─────────────────────────────────────────────────────────────────────────────

def _similarities(z: NDArray[np.float64], centroids: NDArray[np.float64], threads: int) -> NDArray[np.float64]:
    parts = ordered_map(lambda rows: z[rows] @ centroids.T, row_chunks(z.shape[0]), threads)
    return np.vstack(parts)


def _assigned_angles(sims: NDArray[np.float64], assign: NDArray[np.int64]) -> NDArray[np.float64]:
    return np.arccos(clamp_cosine(sims[np.arange(sims.shape[0]), assign]))


def _kmeans_pp(z: NDArray[np.float64], k: int, rng: np.random.Generator) -> NDArray[np.float64]:
    n = z.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.arccos(clamp_cosine(z @ z[chosen[0]])) ** 2
    for _ in range(1, k):
        weights = d2.copy()
        weights[chosen] = 0.0
        total = float(weights.sum())
        if total > 0:
            nxt = int(rng.choice(n, p=weights / total))
        else:
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        d2 = np.minimum(d2, np.arccos(clamp_cosine(z @ z[nxt])) ** 2)
    return np.vstack([normalize(z[i]) for i in chosen])


def _repair_empty(z, centroids, sims, assign, threads):
    k = centroids.shape[0]
    for _ in range(k):
        empty = np.flatnonzero(np.bincount(assign, minlength=k) == 0)
        if empty.size == 0:
            break
        angles = _assigned_angles(sims, assign)
        for j in empty:
            far = int(np.argmax(angles))
            logger.warning(f"Cluster {int(j)} empty; reseeding from sample {far} (angle {angles[far]:.4f})")
            centroids[j] = normalize(z[far])
            angles[far] = -np.inf
        sims = _similarities(z, centroids, threads)
        assign = np.argmax(sims, axis=1)
    return centroids, sims, assign


def _update(z, centroids, assign):
    updated = centroids.copy()
    for j in range(centroids.shape[0]):
        members = z[assign == j]
        if members.shape[0] == 0:
            continue
        total = members.sum(axis=0)
        norm = float(np.linalg.norm(total))
        if norm <= NORM_FLOOR:
            far = int(np.argmax(np.arccos(clamp_cosine(members @ centroids[j]))))
            logger.warning(f"Degenerate mean in cluster {j} (|sum|={norm:.2e}); using farthest member")
            updated[j] = normalize(members[far])
        else:
            updated[j] = total / norm
    return updated


# ─────────────────────────────────────────────────────────────────────────────
# PUBLIC API
# ─────────────────────────────────────────────────────────────────────────────

def fit(
    embeddings: ArrayLike,
    k: int = 4,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-6,
    threads: int = 1,
) -> ClusterModel:
    """Spherical k-means over unit embeddings (rows)."""
    cfg = ClusterConfig(k=k, seed=seed, max_iters=max_iters, tol=tol)
    z = np.asarray(embeddings, dtype=np.float64)
    if z.ndim != 2:
        raise DimensionMismatch(f"embeddings must be (n, d), got shape {z.shape}")
    n = z.shape[0]
    if n < cfg.k:
        raise TooFewSamples(f"need at least k={cfg.k} samples, got {n}")

    rng = np.random.default_rng(cfg.seed)
    centroids = _kmeans_pp(z, cfg.k, rng)
    sims = _similarities(z, centroids, threads)
    assign = np.argmax(sims, axis=1)
    centroids, sims, assign = _repair_empty(z, centroids, sims, assign, threads)
    logger.debug(f"seeding objective {float(np.mean(_assigned_angles(sims, assign))):.9f}")

    history: List[float] = []
    for step in range(1, cfg.max_iters + 1):
        moved = _update(z, centroids, assign)
        moved_sims = _similarities(z, moved, threads)
        moved_assign = np.argmax(moved_sims, axis=1)
        moved, moved_sims, moved_assign = _repair_empty(z, moved, moved_sims, moved_assign, threads)
        objective = float(np.mean(_assigned_angles(moved_sims, moved_assign)))
        if history and objective > history[-1]:
            logger.debug(f"iter {step}: objective {objective:.9f} above {history[-1]:.9f}; step discarded")
            break
        centroids, sims, assign = moved, moved_sims, moved_assign
        history.append(objective)
        logger.debug(f"iter {step}: objective {objective:.9f}")
        if len(history) > 1 and history[-2] - objective < cfg.tol:
            break

    n_iter = len(history)
    logger.info(f"Spherical k-means: k={cfg.k}, n={n}, {n_iter} iterations, objective {history[-1]:.6f}")
    return ClusterModel(
        centroids=centroids,
        assignments=assign.astype(np.int64),
        objective_history=history,
        k=cfg.k,
        seed=cfg.seed,
        n_iter=n_iter,
    )


def angles_to_centroids(model: ClusterModel, z: ArrayLike) -> NDArray[np.float64]:
    """Angular distance from ``z`` to every centroid, in centroid order."""
    return angles_between(np.asarray(z, dtype=np.float64), model.centroids)


def save_cluster_model(model: ClusterModel, path) -> None:
    arrays = {
        "centroids": model.centroids,
        "assignments": model.assignments,
        "objective_history": np.asarray(model.objective_history, dtype=np.float64),
    }
    meta = {"k": model.k, "seed": model.seed, "n_iter": model.n_iter, "embed_dim": model.embed_dim}
    write_checkpoint(path, CLUSTER_KIND, meta, arrays)


def load_cluster_model(path, expected_embed_dim: Optional[int] = None) -> ClusterModel:
    meta, arrays = read_checkpoint(path, CLUSTER_KIND)
    model = ClusterModel(
        centroids=arrays["centroids"],
        assignments=arrays["assignments"],
        objective_history=[float(x) for x in arrays["objective_history"]],
        k=int(meta["k"]),
        seed=int(meta["seed"]),
        n_iter=int(meta["n_iter"]),
    )
    if expected_embed_dim is not None and model.embed_dim != expected_embed_dim:
        raise CheckpointMismatch(
            f"{path}: centroids are {model.embed_dim}-d, expected {expected_embed_dim}"
        )
    return model
