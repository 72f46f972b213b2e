"""
ADAptation Domain Bias
======================
Cross-domain similarity statistics.

similarity(x) = cosine between x and the source centroid, where the source
centroid is the normalized mean of the normalized source features.
For each domain the report carries the similarity mean, population std and
bias = |domain mean - source mean|, plus the raw similarity samples for
external density plots.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dataio import FeatureMatrix, as_matrix
from geometry import normalize, normalize_rows
from guards import DataIOError, EmptySet, InvalidConfig

logger = logging.getLogger("adaptation.reconproxy")

BIAS_HEADER = ["domain", "stage", "mean", "std", "bias"]
SIMILARITY_HEADER = ["domain", "similarity"]


@dataclass(frozen=True)
class DomainStats:
    domain: str
    mean: float
    std: float
    bias: float
    n: int


@dataclass
class DomainBiasReport:
    source_domain: str
    source_mean: float
    source_std: float
    rows: List[DomainStats] = field(default_factory=list)
    samples: Dict[str, NDArray[np.float64]] = field(default_factory=dict)

    def by_domain(self) -> Dict[str, DomainStats]:
        return {row.domain: row for row in self.rows}

    def bias(self, domain: str) -> float:
        return self.by_domain()[domain].bias


def source_centroid(source: Union[FeatureMatrix, ArrayLike]) -> NDArray[np.float64]:
    values = as_matrix(source)
    if values.ndim != 2 or values.shape[0] == 0:
        raise EmptySet("source set is empty")
    return normalize(normalize_rows(values).mean(axis=0))


def similarity_to(features: Union[FeatureMatrix, ArrayLike], centroid: NDArray[np.float64]) -> NDArray[np.float64]:
    return normalize_rows(as_matrix(features)) @ centroid


def domain_bias(
    source: Union[FeatureMatrix, ArrayLike],
    target_sets: Mapping[str, Union[FeatureMatrix, ArrayLike]],
    source_domain: str = "source",
) -> DomainBiasReport:
    """Similarity-to-source statistics for the source and every target set."""
    if source_domain in target_sets:
        raise InvalidConfig(f"target sets must not include the source domain {source_domain!r}")
    source_values = as_matrix(source)
    if source_values.ndim != 2 or source_values.shape[0] == 0:
        raise EmptySet("source set is empty")
    for domain, values in target_sets.items():
        values = as_matrix(values)
        if values.ndim != 2 or values.shape[0] == 0:
            raise EmptySet(f"target set {domain!r} is empty")

    centroid = source_centroid(source_values)
    src_sim = similarity_to(source_values, centroid)
    src_mean = float(np.mean(src_sim))
    report = DomainBiasReport(
        source_domain=source_domain,
        source_mean=src_mean,
        source_std=float(np.std(src_sim)),
    )
    report.rows.append(DomainStats(source_domain, src_mean, report.source_std, 0.0, int(src_sim.shape[0])))
    report.samples[source_domain] = src_sim

    for domain, values in target_sets.items():
        sim = similarity_to(values, centroid)
        mean = float(np.mean(sim))
        report.rows.append(DomainStats(domain, mean, float(np.std(sim)), abs(mean - src_mean), int(sim.shape[0])))
        report.samples[domain] = sim
        logger.debug(f"Domain {domain}: similarity {mean:.4f}, bias {abs(mean - src_mean):.4f}")
    return report


def write_bias_csv(reports: Mapping[str, DomainBiasReport], path: Union[str, Path]) -> None:
    """One row per (stage, domain), stages in mapping order."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(BIAS_HEADER)
            for stage, report in reports.items():
                for row in report.rows:
                    writer.writerow([row.domain, stage, f"{row.mean:.9g}", f"{row.std:.9g}", f"{row.bias:.9g}"])
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


def write_similarity_csv(report: DomainBiasReport, path: Union[str, Path]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SIMILARITY_HEADER)
            for domain, sims in report.samples.items():
                for value in sims:
                    writer.writerow([domain, f"{float(value):.9g}"])
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
