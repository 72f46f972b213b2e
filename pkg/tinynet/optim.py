"""
Adam optimizer, cosine-annealed learning rate and EMA teacher updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .mlp import MlpParams, PARAM_NAMES


@dataclass
class Adam:
    """Adam with bias correction; updates MlpParams in place."""
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def step(self, params: MlpParams, grads: MlpParams, lr: float) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name in PARAM_NAMES:
            g = getattr(grads, name)
            m = self.m.get(name)
            v = self.v.get(name)
            m = self.beta1 * m + (1.0 - self.beta1) * g if m is not None else (1.0 - self.beta1) * g
            v = self.beta2 * v + (1.0 - self.beta2) * g * g if v is not None else (1.0 - self.beta2) * g * g
            self.m[name], self.v[name] = m, v
            update = lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            setattr(params, name, getattr(params, name) - update)


def cosine_annealing_lr(epoch: int, epochs: int, lr: float, floor: float = 0.0) -> float:
    """lr at ``epoch``: ``lr`` at epoch 0, ``floor`` at the final epoch, monotone in between."""
    if epochs <= 1:
        return lr
    progress = epoch / (epochs - 1)
    return floor + (lr - floor) * 0.5 * (1.0 + math.cos(math.pi * progress))


def ema_momentum_at(step: int, total_steps: int, start: float, end: float) -> float:
    """Cosine ramp of the EMA momentum from ``start`` to ``end``."""
    if total_steps <= 1:
        return start
    cosine_decay = (1.0 + math.cos(math.pi * step / (total_steps - 1))) / 2.0
    return end - (end - start) * cosine_decay


def ema_update(teacher: MlpParams, student: MlpParams, momentum: float) -> None:
    """teacher <- momentum * teacher + (1 - momentum) * student, in place."""
    for name in PARAM_NAMES:
        setattr(teacher, name, momentum * getattr(teacher, name) + (1.0 - momentum) * getattr(student, name))
