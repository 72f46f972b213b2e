"""
ADAptation Reconstruction Proxy
Reconstruction providers, the affine homogenization proxy and the
cross-domain bias analytics.
"""

from .bias import (
    BIAS_HEADER,
    SIMILARITY_HEADER,
    DomainBiasReport,
    DomainStats,
    domain_bias,
    similarity_to,
    source_centroid,
    write_bias_csv,
    write_similarity_csv,
)
from .proxy import (
    PROVIDERS,
    DomainMap,
    ProxyConfig,
    ProxyReconstructor,
    ReconstructionProvider,
    build_pairs,
    fit_mean_matching_maps,
    proxy_for_manifest,
    proxy_reconstruct,
)

__all__ = [
    "BIAS_HEADER",
    "PROVIDERS",
    "SIMILARITY_HEADER",
    "DomainBiasReport",
    "DomainMap",
    "DomainStats",
    "ProxyConfig",
    "ProxyReconstructor",
    "ReconstructionProvider",
    "build_pairs",
    "domain_bias",
    "fit_mean_matching_maps",
    "proxy_for_manifest",
    "proxy_reconstruct",
    "similarity_to",
    "source_centroid",
    "write_bias_csv",
    "write_similarity_csv",
]
