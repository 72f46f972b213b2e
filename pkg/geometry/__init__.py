"""
ADAptation Geometry
Unit-hypersphere primitives: normalization, angular distance, angular loss.
"""

from .parallel import CHUNK_ROWS, ordered_map, row_chunks
from .sphere import (
    DEFAULT_EMBED_DIM,
    DEFAULT_LOSS,
    LossConfig,
    NORM_FLOOR,
    UnitEmbedding,
    angles_between,
    angular_loss,
    angular_loss_grad,
    angular_loss_grad_batch,
    clamp_cosine,
    is_unit,
    loss_floor,
    normalize,
    normalize_rows,
    pair_cosines,
    spherical_distance,
)

__all__ = [
    "CHUNK_ROWS",
    "ordered_map",
    "row_chunks",
    "DEFAULT_EMBED_DIM",
    "DEFAULT_LOSS",
    "LossConfig",
    "NORM_FLOOR",
    "UnitEmbedding",
    "angles_between",
    "angular_loss",
    "angular_loss_grad",
    "angular_loss_grad_batch",
    "clamp_cosine",
    "is_unit",
    "loss_floor",
    "normalize",
    "normalize_rows",
    "pair_cosines",
    "spherical_distance",
]
