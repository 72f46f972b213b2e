"""
ADAptation Tiny Network
Projection head (MLP, manual backprop), Adam, cosine annealing and the
teacher-student training loop.
"""

from .mlp import ForwardCache, MlpParams, backward, forward, forward_batch, init_params
from .optim import Adam, cosine_annealing_lr, ema_momentum_at, ema_update
from .trainer import (
    HEAD_KIND,
    TrainedHead,
    TrainerConfig,
    embed_all,
    load_head,
    save_head,
    train_heads,
)

__all__ = [
    "Adam",
    "ForwardCache",
    "HEAD_KIND",
    "MlpParams",
    "TrainedHead",
    "TrainerConfig",
    "backward",
    "cosine_annealing_lr",
    "ema_momentum_at",
    "ema_update",
    "embed_all",
    "forward",
    "forward_batch",
    "init_params",
    "load_head",
    "save_head",
    "train_heads",
]
