"""
ADAptation Synthetic Domains
============================
SOURCE OF TRUTH for the benchmark - generates a labeled source domain and
shifted, unlabeled target domains.

PURPOSE:
- Two Gaussian classes per domain, separated along a shared class axis
- Per-domain additive mean shift (the domain bias)
- Per-domain class imbalance and annotation noise
- 90/10 selection/test split per target domain; selection labels hidden

FORBIDDEN:
- No knowledge of selection strategies
- No knowledge of the classifier

Hidden selection labels are kept in ``oracle_labels`` and only revealed
for selected ids.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from numpy.typing import NDArray

from dataio import LABEL_NAMES, FeatureMatrix, SampleManifest, SampleRecord
from geometry import normalize
from guards import InvalidConfig
from reconproxy import ProxyReconstructor, fit_mean_matching_maps

logger = logging.getLogger("adaptation.bench")

SOURCE_DOMAIN = "source"
BASE_NORM = 3.0


@dataclass(frozen=True)
class SyntheticSpec:
    n_domains: int = 2
    samples_per_domain: int = 400
    feature_dim: int = 32
    shift: float = 6.0
    class_separation: float = 3.0
    label_noise: float = 0.0
    class_imbalance: float = 0.0
    test_fraction: float = 0.1
    emit_recon: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n_domains < 1:
            raise InvalidConfig(f"n_domains must be >= 1, got {self.n_domains}")
        if self.samples_per_domain < 2:
            raise InvalidConfig(f"samples_per_domain must be >= 2, got {self.samples_per_domain}")
        if self.feature_dim < 2:
            raise InvalidConfig(f"feature_dim must be >= 2, got {self.feature_dim}")
        if self.shift < 0 or self.class_separation < 0:
            raise InvalidConfig("shift and class_separation must be >= 0")
        if not 0.0 <= self.label_noise < 0.5:
            raise InvalidConfig(f"label_noise must lie in [0, 0.5), got {self.label_noise}")
        if not 0.0 <= self.class_imbalance < 0.5:
            raise InvalidConfig(f"class_imbalance must lie in [0, 0.5), got {self.class_imbalance}")
        if not 0.0 < self.test_fraction < 1.0:
            raise InvalidConfig(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def target_domains(self) -> List[str]:
        return [f"target_{i + 1}" for i in range(self.n_domains)]


@dataclass
class SyntheticDataset:
    """Feature file contents, manifest and the hidden pool labels."""
    spec: SyntheticSpec
    features: FeatureMatrix
    manifest: SampleManifest
    oracle_labels: Dict[str, int] = field(default_factory=dict)

    def _rows(self, records: List[SampleRecord]) -> NDArray[np.float64]:
        return self.features.rows([s.feature_row for s in records]).reshape(len(records), self.features.d)

    def source_xy(self) -> Tuple[NDArray[np.float64], NDArray[np.int64]]:
        records = self.manifest.select("source")
        return self._rows(records), np.array([LABEL_NAMES.index(s.label) for s in records], dtype=np.int64)

    def test_xy(self) -> Tuple[NDArray[np.float64], NDArray[np.int64]]:
        records = self.manifest.select("test")
        return self._rows(records), np.array([LABEL_NAMES.index(s.label) for s in records], dtype=np.int64)

    def pool(self) -> Tuple[List[str], List[str], NDArray[np.float64]]:
        records = self.manifest.select("pool")
        return [s.id for s in records], [s.domain for s in records], self._rows(records)

    def domain_features(self, domain: str, roles=("source", "pool", "test")) -> NDArray[np.float64]:
        records = [s for s in self.manifest.samples if s.domain == domain and s.role in roles]
        return self._rows(records)


def _class_fraction(spec: SyntheticSpec, domain_index: int) -> float:
    """Malignant fraction; domain 0 is the source and stays balanced."""
    if domain_index == 0:
        return 0.5
    return 0.5 + spec.class_imbalance * (1 if domain_index % 2 else -1)


def generate(spec: SyntheticSpec) -> SyntheticDataset:
    """Seeded multi-domain dataset: labeled source, target pools and test splits."""
    rng = np.random.default_rng(spec.seed)
    d = spec.feature_dim
    class_axis = normalize(rng.normal(size=d))
    base = BASE_NORM * normalize(rng.normal(size=d))
    shifts = [np.zeros(d)] + [spec.shift * normalize(rng.normal(size=d)) for _ in range(spec.n_domains)]
    domains = [SOURCE_DOMAIN] + spec.target_domains()

    rows: List[NDArray[np.float64]] = []
    records: List[SampleRecord] = []
    oracle: Dict[str, int] = {}
    n = spec.samples_per_domain

    for index, domain in enumerate(domains):
        true = (rng.random(n) < _class_fraction(spec, index)).astype(np.int64)
        signs = 2.0 * true - 1.0
        x = base + shifts[index] + np.outer(signs, 0.5 * spec.class_separation * class_axis) + rng.normal(size=(n, d))
        observed = np.where(rng.random(n) < spec.label_noise, 1 - true, true)

        if index == 0:
            roles = ["source"] * n
        else:
            n_test = max(1, int(round(spec.test_fraction * n)))
            roles = ["pool"] * n
            for i in rng.permutation(n)[:n_test]:
                roles[int(i)] = "test"

        offset = len(rows)
        for i in range(n):
            sample_id = f"{domain}_{i:05d}"
            role = roles[i]
            # test splits carry clean labels, annotated samples carry noisy ones
            label = int(true[i]) if role == "test" else int(observed[i])
            records.append(SampleRecord(
                id=sample_id,
                domain=domain,
                feature_row=offset + i,
                label=None if role == "pool" else LABEL_NAMES[label],
                role=role,
            ))
            if role == "pool":
                oracle[sample_id] = label
        rows.extend(x)

    values = np.vstack(rows)
    manifest = SampleManifest(source_domain=SOURCE_DOMAIN, samples=records)
    if spec.emit_recon:
        values, manifest = _attach_reconstructions(values, manifest)

    logger.info(
        f"Generated {len(domains)} domains x {n} samples, dim {d}, shift {spec.shift}, "
        f"{len(oracle)} pool samples (seed {spec.seed})"
    )
    return SyntheticDataset(spec=spec, features=FeatureMatrix(values), manifest=manifest, oracle_labels=oracle)


def _attach_reconstructions(values: NDArray[np.float64], manifest: SampleManifest) -> Tuple[NDArray[np.float64], SampleManifest]:
    """Append mean-matched reconstruction rows for the pool and point recon_row at them."""
    fitted = [s for s in manifest.samples if s.role in ("source", "pool")]
    maps = fit_mean_matching_maps(
        values[[s.feature_row for s in fitted]], [s.domain for s in fitted], manifest.source_domain
    )
    proxy = ProxyReconstructor(maps)
    pool = manifest.select("pool")
    recons = proxy.reconstruct_rows(values[[s.feature_row for s in pool]], [s.domain for s in pool])

    recon_row = {s.id: values.shape[0] + i for i, s in enumerate(pool)}
    samples = [
        s.model_copy(update={"recon_row": recon_row[s.id]}) if s.id in recon_row else s
        for s in manifest.samples
    ]
    return np.vstack([values, recons]), SampleManifest(source_domain=manifest.source_domain, samples=samples)
