"""
Baseline acquisition strategies.

    random          seeded uniform draw
    margin          smallest |p(1) - p(0)| first
    entropy         largest binary entropy first
    farthest_first  greedy k-center in raw feature space, optionally
                    seeded by already-labeled anchor points

Every strategy returns exactly the budgeted number of ids; ties are broken
by ascending id.
"""

from __future__ import annotations

from typing import List, Literal, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from guards import BudgetExceedsPool, InvalidConfig
from selection import selection_count

from .classifier import LogisticModel

Strategy = Literal["random", "margin", "entropy", "farthest_first"]
BASELINES = ("random", "margin", "entropy", "farthest_first")


def _binary_entropy(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return -(p * np.log(p) + (1.0 - p) * np.log(1.0 - p))


def farthest_first(features: ArrayLike, budget: int, anchors: Optional[ArrayLike] = None) -> List[int]:
    """
    Greedy k-center: repeatedly take the point farthest from everything
    chosen so far. Without anchors the first pick is the point farthest
    from the pool mean.
    """
    x = np.asarray(features, dtype=np.float64)
    first: Optional[int] = None
    if anchors is not None and np.asarray(anchors).shape[0] > 0:
        a = np.asarray(anchors, dtype=np.float64)
        mins = np.min(np.linalg.norm(x[:, None, :] - a[None, :, :], axis=2), axis=1)
    else:
        mins = np.full(x.shape[0], np.inf)
        first = int(np.argmax(np.linalg.norm(x - x.mean(axis=0), axis=1)))

    chosen: List[int] = []
    for step in range(budget):
        p = first if step == 0 and first is not None else int(np.argmax(mins))
        chosen.append(p)
        mins = np.minimum(mins, np.linalg.norm(x - x[p], axis=1))
        mins[chosen] = -1.0
    return chosen


def baseline_select(
    strategy: Strategy,
    ids: Sequence[str],
    features: ArrayLike,
    alpha_percent: float,
    seed: int = 0,
    model: Optional[LogisticModel] = None,
    anchors: Optional[ArrayLike] = None,
    budget: Optional[int] = None,
) -> List[str]:
    """Pick max(1, floor(alpha/100 * N)) pool ids (or ``budget`` if given)."""
    # canonical id order keeps every strategy independent of pool order
    order = sorted(range(len(ids)), key=lambda i: ids[i])
    ids = [ids[i] for i in order]
    x = np.asarray(features, dtype=np.float64)[order] if len(order) else np.zeros((0, 0))
    n = len(ids)
    count = selection_count(alpha_percent, n) if budget is None else budget
    if count > n or count < 1:
        raise BudgetExceedsPool(f"budget {count} does not fit a pool of {n}")

    if strategy == "random":
        picks = np.random.default_rng(seed).choice(n, size=count, replace=False)
        return [ids[int(i)] for i in picks]
    if strategy in ("margin", "entropy"):
        if model is None:
            raise InvalidConfig(f"{strategy} sampling needs a trained classifier")
        p = model.predict_proba(x)
        key = np.abs(2.0 * p - 1.0) if strategy == "margin" else -_binary_entropy(p)
        ranked = sorted(range(n), key=lambda i: (float(key[i]), ids[i]))
        return [ids[i] for i in ranked[:count]]
    if strategy == "farthest_first":
        return [ids[i] for i in farthest_first(x, count, anchors)]
    raise InvalidConfig(f"unknown baseline strategy {strategy!r}")
