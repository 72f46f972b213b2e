"""
ADAptation Sample Manifests
===========================
Per-sample identity, domain, feature row, optional reconstruction row and
optional label, stored as JSON so the original <-> reconstruction pairing
stays human-auditable.

{
  "source_domain": "source",
  "samples": [
    {"id": "t1_0007", "domain": "target_1", "feature_row": 7,
     "recon_row": 412, "label": null, "role": "pool"}
  ]
}
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from guards import (
    DanglingRowIndex,
    DataIOError,
    DimensionMismatch,
    DuplicateId,
    MissingReconPair,
    ParseError,
)

from .features import FeatureMatrix, PathLike

logger = logging.getLogger("adaptation.dataio")

Label = Literal["benign", "malignant"]
Role = Literal["source", "pool", "test"]

LABEL_CODES: Dict[str, int] = {"benign": 0, "malignant": 1}
LABEL_NAMES: Tuple[str, str] = ("benign", "malignant")


class SampleRecord(BaseModel):
    """One manifest row."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str = Field(..., min_length=1, max_length=256)
    domain: str = Field(..., min_length=1, max_length=128)
    feature_row: int = Field(..., ge=0)
    recon_row: Optional[int] = Field(None, ge=0)
    label: Optional[Label] = None
    role: Role = "pool"


class SampleManifest(BaseModel):
    """All samples of a run: labeled source, unlabeled pool, labeled test splits."""
    model_config = ConfigDict(extra="forbid")

    source_domain: str = "source"
    samples: List[SampleRecord] = Field(default_factory=list)

    def ids(self) -> List[str]:
        return [s.id for s in self.samples]

    def by_id(self) -> Dict[str, SampleRecord]:
        return {s.id: s for s in self.samples}

    def select(self, role: Role) -> List[SampleRecord]:
        return [s for s in self.samples if s.role == role]

    def domains(self, role: Optional[Role] = None) -> List[str]:
        """Distinct domains in first-seen order."""
        seen: Dict[str, None] = {}
        for s in self.samples:
            if role is None or s.role == role:
                seen.setdefault(s.domain, None)
        return list(seen)

    def check_unique_ids(self) -> None:
        dupes = sorted(i for i, c in Counter(self.ids()).items() if c > 1)
        if dupes:
            raise DuplicateId(f"duplicate sample id(s): {', '.join(dupes[:5])}")

    def check_rows(self, n_rows: int) -> None:
        for s in self.samples:
            for field_name, row in (("feature_row", s.feature_row), ("recon_row", s.recon_row)):
                if row is not None and row >= n_rows:
                    raise DanglingRowIndex(
                        f"sample {s.id}: {field_name}={row} but the feature file has {n_rows} rows"
                    )


def load_manifest(path: PathLike, n_rows: Optional[int] = None) -> SampleManifest:
    """Parse and validate a manifest; row indices are checked when ``n_rows`` is given."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest {path} is not valid JSON: {exc}") from exc
    try:
        manifest = SampleManifest.model_validate(raw)
    except ValidationError as exc:
        raise ParseError(f"manifest {path} failed validation: {exc}") from exc

    manifest.check_unique_ids()
    if n_rows is not None:
        manifest.check_rows(n_rows)
    logger.info(f"Loaded manifest {path}: {len(manifest.samples)} samples")
    return manifest


def save_manifest(manifest: SampleManifest, path: PathLike) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(
            json.dumps(manifest.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise DataIOError(f"cannot write manifest {path}: {exc}") from exc


# ─────────────────────────────────────────────────────────────────────────────
# PAIRING
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class PairedPool:
    """Originals x_u and their reconstructions x_r, row-aligned."""
    ids: Tuple[str, ...]
    domains: Tuple[str, ...]
    originals: NDArray[np.float64]
    reconstructions: NDArray[np.float64]

    def __post_init__(self):
        originals = np.asarray(self.originals, dtype=np.float64)
        recons = np.asarray(self.reconstructions, dtype=np.float64)
        if originals.ndim != 2 or originals.shape != recons.shape:
            raise DimensionMismatch(
                f"originals {originals.shape} and reconstructions {recons.shape} must match"
            )
        if not len(self.ids) == len(self.domains) == originals.shape[0]:
            raise DimensionMismatch("ids, domains and feature rows differ in length")
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "domains", tuple(self.domains))
        object.__setattr__(self, "originals", originals)
        object.__setattr__(self, "reconstructions", recons)

    @property
    def n(self) -> int:
        return len(self.ids)


def external_pairs(
    manifest: SampleManifest,
    features: FeatureMatrix,
    role: Role = "pool",
) -> PairedPool:
    """Pair every ``role`` sample with its ``recon_row`` from the same feature file."""
    records = manifest.select(role)
    missing = [s.id for s in records if s.recon_row is None]
    if missing:
        raise MissingReconPair(
            f"{len(missing)} {role} sample(s) lack recon_row (first: {missing[0]}); "
            "use provider=proxy or add reconstruction rows"
        )
    manifest.check_rows(features.n)
    return PairedPool(
        ids=tuple(s.id for s in records),
        domains=tuple(s.domain for s in records),
        originals=features.rows([s.feature_row for s in records]).reshape(len(records), features.d),
        reconstructions=features.rows([s.recon_row for s in records]).reshape(len(records), features.d),
    )
