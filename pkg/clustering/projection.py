"""
3-D sphere projection of embeddings, for plotting outside this package.

Embeddings are projected on their top three principal axes and pushed back
onto the unit sphere. Axis signs are fixed so the output is deterministic.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray


def sphere_projection_3d(embeddings: ArrayLike) -> NDArray[np.float64]:
    z = np.asarray(embeddings, dtype=np.float64)
    if z.shape[0] == 0:
        return np.zeros((0, 3))
    centered = z - z.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    axes = vt[:3]
    if axes.shape[0] < 3:
        axes = np.vstack([axes, np.zeros((3 - axes.shape[0], z.shape[1]))])
    for i in range(axes.shape[0]):
        pivot = int(np.argmax(np.abs(axes[i])))
        if axes[i, pivot] < 0:
            axes[i] = -axes[i]
    coords = z @ axes.T
    norms = np.linalg.norm(coords, axis=1, keepdims=True)
    return np.divide(coords, norms, out=np.zeros_like(coords), where=norms > 0)
