"""
ADAptation Teacher-Student Trainer
==================================
Align originals and their source-style reconstructions on the
hypersphere.

    teacher f  embeds the original        x_u
    student g  embeds the reconstruction  x_r
    loss       mean (m * arccos(f^ . g^))^2

Only the student receives gradients (Adam). After every optimizer step the
teacher tracks the student as an exponential moving average. At inference
only the frozen student is used.

Determinism: one seeded generator drives initialization and the per-epoch
shuffles; identical config and inputs give bitwise-identical heads.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dataio import CKPT_VERSION, FeatureMatrix, PairedPool, as_matrix, read_checkpoint, write_checkpoint
from geometry import (
    DEFAULT_EMBED_DIM,
    LossConfig,
    angular_loss,
    angular_loss_grad_batch,
    ordered_map,
)
from guards import CheckpointMismatch, DimensionMismatch, EmptyPool, InvalidConfig, NonFiniteLoss

from .mlp import MlpParams, backward, forward, forward_batch, init_params, normalize_inputs
from .optim import Adam, cosine_annealing_lr, ema_momentum_at, ema_update

logger = logging.getLogger("adaptation.tinynet")

HEAD_KIND = "trained_head"

# (epoch, step, teacher_out, student_out, batch_loss)
StepCallback = Callable[[int, int, NDArray[np.float64], NDArray[np.float64], float], None]


@dataclass(frozen=True)
class TrainerConfig:
    """Projection-head training settings."""
    epochs: int = 200
    learning_rate: float = 1e-4
    lr_floor: float = 0.0
    batch_size: int = 32
    ema_momentum: float = 0.99
    ema_momentum_final: Optional[float] = None
    hidden_dim: int = 512
    embed_dim: int = DEFAULT_EMBED_DIM
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidConfig(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise InvalidConfig(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 <= self.lr_floor <= self.learning_rate:
            raise InvalidConfig(f"lr_floor must lie in [0, learning_rate], got {self.lr_floor}")
        if self.batch_size < 1:
            raise InvalidConfig(f"batch_size must be >= 1, got {self.batch_size}")
        for name in ("ema_momentum", "ema_momentum_final"):
            value = getattr(self, name)
            if value is not None and not 0 <= value <= 1:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {value}")
        if self.hidden_dim < 1 or self.embed_dim < 2:
            raise InvalidConfig(f"hidden_dim >= 1 and embed_dim >= 2 required")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if isinstance(self.loss, dict):
            object.__setattr__(self, "loss", LossConfig(**self.loss))

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "TrainerConfig":
        raw = dict(raw)
        raw["loss"] = LossConfig(**raw.get("loss", {}))
        return cls(**raw)


@dataclass
class TrainedHead:
    """Student and teacher parameters plus the per-epoch mean loss."""
    student: MlpParams
    teacher: MlpParams
    loss_history: List[float]
    config: TrainerConfig

    @property
    def embed_dim(self) -> int:
        return self.student.embed_dim

    @property
    def input_dim(self) -> int:
        return self.student.input_dim


# ─────────────────────────────────────────────────────────────────────────────
# TRAINING
# ─────────────────────────────────────────────────────────────────────────────

def train_heads(
    pairs: PairedPool,
    cfg: TrainerConfig,
    initial: Optional[MlpParams] = None,
    step_callback: Optional[StepCallback] = None,
) -> TrainedHead:
    """
    Train the student on (x_u, x_r) pairs; the teacher follows by EMA.

    ``initial`` replaces the seeded initialization (the teacher starts as an
    exact copy either way). ``step_callback`` sees every batch's embeddings
    and loss.
    """
    if pairs.n == 0:
        raise EmptyPool("cannot train on an empty pool")
    d_in = pairs.originals.shape[1]
    rng = np.random.default_rng(cfg.seed)

    if initial is None:
        student = init_params(d_in, cfg.hidden_dim, cfg.embed_dim, rng)
    else:
        if initial.input_dim != d_in:
            raise DimensionMismatch(
                f"initial head expects {initial.input_dim}-d features, pool has {d_in}"
            )
        student = initial.copy()
    teacher = student.copy()
    x_u = normalize_inputs(pairs.originals, student)
    x_r = normalize_inputs(pairs.reconstructions, student)

    optimizer = Adam()
    n = pairs.n
    steps_per_epoch = -(-n // cfg.batch_size)
    total_steps = cfg.epochs * steps_per_epoch
    history: List[float] = []
    step = 0

    logger.info(
        f"Training head: {n} pairs, {cfg.epochs} epochs, batch {cfg.batch_size}, "
        f"lr {cfg.learning_rate:g}->{cfg.lr_floor:g}, ema {cfg.ema_momentum}"
    )

    for epoch in range(cfg.epochs):
        lr = cosine_annealing_lr(epoch, cfg.epochs, cfg.learning_rate, cfg.lr_floor)
        order = rng.permutation(n)
        weighted = 0.0

        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            t_out = forward_batch(teacher, x_u[idx]).out
            cache = forward_batch(student, x_r[idx])

            _, d_student = angular_loss_grad_batch(t_out, cache.out, cfg.loss)
            batch_loss = angular_loss(t_out, cache.out, cfg.loss)
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(f"loss became non-finite at epoch {epoch}, step {step}")
            if step_callback is not None:
                step_callback(epoch, step, t_out, cache.out, batch_loss)

            optimizer.step(student, backward(student, cache, d_student), lr)
            if cfg.ema_momentum_final is None:
                momentum = cfg.ema_momentum
            else:
                momentum = ema_momentum_at(step, total_steps, cfg.ema_momentum, cfg.ema_momentum_final)
            ema_update(teacher, student, momentum)

            weighted += batch_loss * len(idx)
            step += 1

        epoch_loss = weighted / n
        if not np.isfinite(epoch_loss) or not student.is_finite():
            raise NonFiniteLoss(f"training diverged at epoch {epoch}")
        history.append(epoch_loss)
        logger.debug(f"epoch {epoch}: loss {epoch_loss:.6g} lr {lr:.3g}")

    logger.info(f"Training done: loss {history[0]:.6g} -> {history[-1]:.6g}")
    return TrainedHead(student=student, teacher=teacher, loss_history=history, config=cfg)


# ─────────────────────────────────────────────────────────────────────────────
# INFERENCE
# ─────────────────────────────────────────────────────────────────────────────

def embed_all(
    head: TrainedHead,
    features: FeatureMatrix | ArrayLike,
    use: Literal["student", "teacher"] = "student",
    threads: int = 1,
) -> NDArray[np.float64]:
    """Embed every row with the frozen ``use`` parameters; row order preserved."""
    if use not in ("student", "teacher"):
        raise InvalidConfig(f"use must be 'student' or 'teacher', got {use!r}")
    params = head.student if use == "student" else head.teacher
    values = as_matrix(features)
    if values.ndim != 2:
        raise DimensionMismatch(f"expected an (n, d) matrix, got shape {values.shape}")
    if values.shape[0] == 0:
        return np.zeros((0, params.embed_dim))
    if values.shape[1] != params.input_dim:
        raise DimensionMismatch(f"features are {values.shape[1]}-d, head expects {params.input_dim}")
    rows = ordered_map(lambda row: forward(params, row), list(values), threads)
    return np.vstack(rows)


# ─────────────────────────────────────────────────────────────────────────────
# CHECKPOINTS
# ─────────────────────────────────────────────────────────────────────────────

def save_head(head: TrainedHead, path) -> None:
    arrays = {
        **head.student.to_arrays("student."),
        **head.teacher.to_arrays("teacher."),
        "loss_history": np.asarray(head.loss_history, dtype=np.float64),
    }
    meta = {"config": head.config.to_dict(), "embed_dim": head.embed_dim, "input_dim": head.input_dim}
    write_checkpoint(path, HEAD_KIND, meta, arrays)
    logger.info(f"Saved head checkpoint (format v{CKPT_VERSION}) to {path}")


def load_head(path, expected_embed_dim: Optional[int] = None) -> TrainedHead:
    meta, arrays = read_checkpoint(path, HEAD_KIND)
    head = TrainedHead(
        student=MlpParams.from_arrays(arrays, "student."),
        teacher=MlpParams.from_arrays(arrays, "teacher."),
        loss_history=[float(x) for x in arrays["loss_history"]],
        config=TrainerConfig.from_dict(meta["config"]),
    )
    if expected_embed_dim is not None and head.embed_dim != expected_embed_dim:
        raise CheckpointMismatch(
            f"{path}: checkpoint embeds into {head.embed_dim} dims, expected {expected_embed_dim}"
        )
    return head
