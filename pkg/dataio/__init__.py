"""
ADAptation Data I/O
Feature files, sample manifests, run configuration and checkpoints.
"""

from .checkpoint import CKPT_MAGIC, CKPT_VERSION, read_checkpoint, write_checkpoint
from .config import load_config, load_json, validate_config
from .features import MAGIC, FeatureMatrix, as_matrix, read_features, write_features
from .manifest import (
    LABEL_CODES,
    LABEL_NAMES,
    PairedPool,
    SampleManifest,
    SampleRecord,
    external_pairs,
    load_manifest,
    save_manifest,
)

__all__ = [
    "CKPT_MAGIC",
    "CKPT_VERSION",
    "LABEL_CODES",
    "LABEL_NAMES",
    "MAGIC",
    "FeatureMatrix",
    "PairedPool",
    "SampleManifest",
    "SampleRecord",
    "as_matrix",
    "external_pairs",
    "load_config",
    "load_json",
    "load_manifest",
    "read_checkpoint",
    "read_features",
    "save_manifest",
    "validate_config",
    "write_checkpoint",
    "write_features",
]
