"""
ADAptation Reconstruction Proxy
===============================
Source-style reconstructions at desk scale.

A reconstruction provider turns a target sample's raw features into a
source-like rendition of the same dimension. The proxy applies a per-domain
affine map toward the source and blends it with the input:

    x_r = (1 - blend) * x + blend * (A_d x + b_d)

External reconstructions enter through recon rows in the manifest; both
paths produce the same PairedPool, so nothing downstream changes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Literal, Mapping, Optional, Protocol, Sequence, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dataio import FeatureMatrix, PairedPool, SampleManifest, external_pairs
from geometry import ordered_map
from guards import DimensionMismatch, EmptyPool, EmptySet, InvalidConfig, UnknownDomain

logger = logging.getLogger("adaptation.reconproxy")

ProviderName = Literal["proxy", "external"]
PROVIDERS = ("proxy", "external")


@runtime_checkable
class ReconstructionProvider(Protocol):
    def reconstruct(self, features: NDArray[np.float64], domain: str) -> NDArray[np.float64]:
        ...


@dataclass(frozen=True)
class ProxyConfig:
    blend: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.blend <= 1.0:
            raise InvalidConfig(f"proxy blend must lie in [0, 1], got {self.blend}")


@dataclass(frozen=True)
class DomainMap:
    """x -> A x + b; ``matrix=None`` is the identity."""
    offset: NDArray[np.float64]
    matrix: Optional[NDArray[np.float64]] = None

    def __post_init__(self):
        offset = np.asarray(self.offset, dtype=np.float64)
        if offset.ndim != 1:
            raise DimensionMismatch(f"map offset must be 1-D, got shape {offset.shape}")
        object.__setattr__(self, "offset", offset)
        if self.matrix is not None:
            matrix = np.asarray(self.matrix, dtype=np.float64)
            if matrix.shape != (offset.shape[0], offset.shape[0]):
                raise DimensionMismatch(f"map matrix {matrix.shape} does not fit offset of dim {offset.shape[0]}")
            object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return int(self.offset.shape[0])

    def apply(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        mapped = x if self.matrix is None else self.matrix @ x
        return mapped + self.offset


def proxy_reconstruct(
    features: ArrayLike,
    domain: str,
    maps: Mapping[str, DomainMap],
    blend: float = 1.0,
) -> NDArray[np.float64]:
    """(1 - blend) * x + blend * map_domain(x); blend = 0 returns x unchanged."""
    if domain not in maps:
        raise UnknownDomain(f"no proxy map for domain {domain!r} (known: {sorted(maps)})")
    x = np.asarray(features, dtype=np.float64)
    dmap = maps[domain]
    if x.ndim != 1 or x.shape[0] != dmap.dim:
        raise DimensionMismatch(f"features of shape {x.shape} do not fit the {dmap.dim}-d map of {domain!r}")
    if blend == 0.0:
        return x.copy()
    return (1.0 - blend) * x + blend * dmap.apply(x)


class ProxyReconstructor:
    """Deterministic ReconstructionProvider backed by per-domain affine maps."""

    def __init__(self, maps: Mapping[str, DomainMap], config: Optional[ProxyConfig] = None):
        self.maps: Dict[str, DomainMap] = dict(maps)
        self.config = config or ProxyConfig()

    def reconstruct(self, features: NDArray[np.float64], domain: str) -> NDArray[np.float64]:
        return proxy_reconstruct(features, domain, self.maps, self.config.blend)

    def reconstruct_rows(
        self,
        features: NDArray[np.float64],
        domains: Sequence[str],
        threads: int = 1,
    ) -> NDArray[np.float64]:
        values = np.asarray(features, dtype=np.float64)
        if values.shape[0] == 0:
            return values.copy()
        rows = ordered_map(lambda i: self.reconstruct(values[i], domains[i]), range(values.shape[0]), threads)
        return np.vstack(rows)


def fit_mean_matching_maps(
    features: ArrayLike,
    domains: Sequence[str],
    source_domain: str,
) -> Dict[str, DomainMap]:
    """Translation maps moving each domain's feature mean onto the source mean."""
    values = np.asarray(features, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != len(domains):
        raise DimensionMismatch(f"{len(domains)} domain tags for features of shape {values.shape}")
    tags = np.asarray(domains, dtype=object)
    source_rows = values[tags == source_domain]
    if source_rows.shape[0] == 0:
        raise EmptySet(f"no samples of source domain {source_domain!r} to anchor the proxy maps")
    anchor = source_rows.mean(axis=0)

    maps: Dict[str, DomainMap] = {}
    for domain in dict.fromkeys(domains):
        rows = values[tags == domain]
        maps[domain] = DomainMap(offset=anchor - rows.mean(axis=0))
        logger.debug(f"Proxy map {domain}: |shift| {np.linalg.norm(maps[domain].offset):.4f}")
    return maps


def proxy_for_manifest(
    manifest: SampleManifest,
    features: FeatureMatrix,
    config: Optional[ProxyConfig] = None,
) -> ProxyReconstructor:
    """Mean-matching proxy fitted on the source samples and every unlabeled pool domain."""
    records = manifest.select("source") + manifest.select("pool")
    rows = features.rows([s.feature_row for s in records]).reshape(len(records), features.d)
    maps = fit_mean_matching_maps(rows, [s.domain for s in records], manifest.source_domain)
    return ProxyReconstructor(maps, config)


def build_pairs(
    manifest: SampleManifest,
    features: FeatureMatrix,
    provider: ProviderName = "proxy",
    proxy: Optional[ReconstructionProvider] = None,
    config: Optional[ProxyConfig] = None,
    threads: int = 1,
) -> PairedPool:
    """Pair every pool sample with its reconstruction from ``provider``."""
    if provider not in PROVIDERS:
        raise InvalidConfig(f"provider must be one of {PROVIDERS}, got {provider!r}")
    if not manifest.select("pool"):
        raise EmptyPool("manifest has no pool samples")
    manifest.check_rows(features.n)
    if provider == "external":
        pairs = external_pairs(manifest, features, "pool")
        logger.info(f"Paired {pairs.n} pool samples with external reconstructions")
        return pairs

    reconstructor = proxy if proxy is not None else proxy_for_manifest(manifest, features, config)
    records = manifest.select("pool")
    originals = features.rows([s.feature_row for s in records]).reshape(len(records), features.d)
    domains = [s.domain for s in records]
    if isinstance(reconstructor, ProxyReconstructor):
        recons = reconstructor.reconstruct_rows(originals, domains, threads)
    else:
        recons = np.vstack(
            ordered_map(lambda i: reconstructor.reconstruct(originals[i], domains[i]), range(len(records)), threads)
        )
    logger.info(f"Paired {len(records)} pool samples with proxy reconstructions")
    return PairedPool(
        ids=tuple(s.id for s in records),
        domains=tuple(domains),
        originals=originals,
        reconstructions=recons,
    )
