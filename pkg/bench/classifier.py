"""
Downstream classifier for the benchmark.

Binary logistic regression trained by full-batch gradient descent. Inputs
are standardized with the source statistics, which stay fixed when the
model is fine-tuned on selected target samples. Weights start at zero, so
training is deterministic without a generator.

Pretraining descends the mean loss until the source fit settles.
Fine-tuning takes a short run of small steps on the summed loss: every
labeled sample adds the same pull, so a larger budget moves the model
further and samples the source model gets wrong move it fastest.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from guards import EmptySet, InvalidConfig

logger = logging.getLogger("adaptation.bench")


@dataclass(frozen=True)
class ClassifierConfig:
    learning_rate: float = 0.2
    pretrain_iters: int = 300
    finetune_learning_rate: float = 1e-4
    finetune_iters: int = 25
    l2: float = 1e-3

    def __post_init__(self):
        if not self.learning_rate > 0 or not self.finetune_learning_rate > 0:
            raise InvalidConfig(
                f"classifier learning rates must be > 0, got {self.learning_rate} "
                f"and {self.finetune_learning_rate}"
            )
        if self.pretrain_iters < 1 or self.finetune_iters < 0:
            raise InvalidConfig("pretrain_iters must be >= 1 and finetune_iters >= 0")
        if self.l2 < 0:
            raise InvalidConfig(f"l2 must be >= 0, got {self.l2}")


@dataclass
class LogisticModel:
    weights: NDArray[np.float64]
    bias: float
    mean: NDArray[np.float64]
    scale: NDArray[np.float64]

    def copy(self) -> "LogisticModel":
        return LogisticModel(self.weights.copy(), self.bias, self.mean.copy(), self.scale.copy())

    def _standardize(self, x: ArrayLike) -> NDArray[np.float64]:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.scale

    def predict_proba(self, x: ArrayLike) -> NDArray[np.float64]:
        """P(label = 1) per row."""
        logits = self._standardize(x) @ self.weights + self.bias
        return 1.0 / (1.0 + np.exp(-np.clip(logits, -500.0, 500.0)))

    def predict(self, x: ArrayLike) -> NDArray[np.int64]:
        return (self.predict_proba(x) >= 0.5).astype(np.int64)

    def accuracy(self, x: ArrayLike, y: ArrayLike) -> float:
        y = np.asarray(y, dtype=np.int64)
        if y.shape[0] == 0:
            raise EmptySet("cannot score accuracy on an empty test set")
        return float(np.mean(self.predict(x) == y))


def _descend(
    model: LogisticModel,
    x: NDArray[np.float64],
    y: NDArray[np.float64],
    iters: int,
    learning_rate: float,
    l2: float,
    mean_loss: bool,
) -> None:
    xs = model._standardize(x)
    n = xs.shape[0] if mean_loss else 1
    for _ in range(iters):
        p = 1.0 / (1.0 + np.exp(-np.clip(xs @ model.weights + model.bias, -500.0, 500.0)))
        err = p - y
        grad_w = xs.T @ err / n + l2 * model.weights
        grad_b = float(np.sum(err) / n)
        model.weights -= learning_rate * grad_w
        model.bias -= learning_rate * grad_b


def pretrain(x: ArrayLike, y: ArrayLike, cfg: Optional[ClassifierConfig] = None) -> LogisticModel:
    """Fit on the labeled source domain; its statistics fix the standardization."""
    cfg = cfg or ClassifierConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptySet("cannot pretrain on an empty source set")
    scale = x.std(axis=0)
    scale = np.where(scale > 1e-12, scale, 1.0)
    model = LogisticModel(np.zeros(x.shape[1]), 0.0, x.mean(axis=0), scale)
    _descend(model, x, y, cfg.pretrain_iters, cfg.learning_rate, cfg.l2, mean_loss=True)
    return model


def finetune(model: LogisticModel, x: ArrayLike, y: ArrayLike, cfg: Optional[ClassifierConfig] = None) -> LogisticModel:
    """Copy of ``model`` after ``finetune_iters`` summed-loss steps on (x, y)."""
    cfg = cfg or ClassifierConfig()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise InvalidConfig("fine-tuning needs at least one labeled sample")
    tuned = model.copy()
    _descend(
        tuned, x, np.asarray(y, dtype=np.float64),
        cfg.finetune_iters, cfg.finetune_learning_rate, cfg.l2, mean_loss=False,
    )
    logger.debug(f"Fine-tuned on {x.shape[0]} samples for {cfg.finetune_iters} steps")
    return tuned
