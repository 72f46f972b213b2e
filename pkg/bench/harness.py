"""
ADAptation Benchmark Harness
============================
Accuracy-vs-budget runs on synthetic shifted domains.

For every seed a fresh dataset is generated and shared by all strategies,
so cells with the same seed form paired comparisons. Bench seed s draws its
dataset with generator seed (spec.seed + s) mod 2**64. Per seed:

    1. pretrain the classifier on the labeled source domain
    2. train the projection head on (pool, proxy reconstruction) pairs
    3. embed, cluster and score the pool once
    4. for each (strategy, alpha): select, reveal labels, fine-tune, test

Seeds run in parallel; each seed is single-threaded and the result table
is sorted before aggregation, so the report does not depend on the worker
count.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.stats import binomtest

from clustering import ClusterConfig, ClusterModel, fit
from dataio import PairedPool
from geometry import normalize_rows, ordered_map
from guards import DataIOError, InvalidConfig, UnknownId
from reconproxy import ProxyConfig, build_pairs
from selection import ScoringConfig, select
from tinynet import TrainerConfig, embed_all, train_heads

from .baselines import BASELINES, baseline_select
from .classifier import ClassifierConfig, LogisticModel, finetune, pretrain
from .synthetic import SyntheticDataset, SyntheticSpec, generate

logger = logging.getLogger("adaptation.bench")

ADAPTATION = "adaptation"
BACKBONE_ONLY = "backbone_only"
NO_RECONSTRUCTION = "no_reconstruction"
FULL = "full"
FULL_ALPHA = 100.0

COMPONENT_ABLATION = (BACKBONE_ONLY, NO_RECONSTRUCTION, ADAPTATION)
CLUSTER_ABLATION = (2, 3, 4, 5)
CELLS_HEADER = ["strategy", "alpha", "seed", "accuracy"]
SUMMARY_HEADER = ["strategy", "alpha", "mean", "std"]


@dataclass(frozen=True)
class BenchConfig:
    strategies: Tuple[str, ...] = (ADAPTATION, "random", "margin", "entropy", "farthest_first")
    alphas: Tuple[float, ...] = (20.0, 30.0, 50.0, 80.0)
    n_seeds: int = 20
    base_seed: int = 0
    include_full: bool = True
    cluster_ks: Tuple[int, ...] = ()
    trainer: TrainerConfig = field(
        default_factory=lambda: TrainerConfig(epochs=50, learning_rate=1e-3, batch_size=16)
    )
    clustering: ClusterConfig = field(default_factory=ClusterConfig)
    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    proxy: ProxyConfig = field(default_factory=ProxyConfig)

    def __post_init__(self):
        known = set(BASELINES) | set(COMPONENT_ABLATION)
        for name in self.strategies:
            if name not in known:
                raise InvalidConfig(f"unknown strategy {name!r} (known: {sorted(known)})")
        if not self.strategies and not self.cluster_ks:
            raise InvalidConfig("benchmark needs at least one strategy")
        for alpha in self.alphas:
            if not 0 < alpha < 100:
                raise InvalidConfig(f"alpha values must lie in (0, 100), got {alpha}")
        for k in self.cluster_ks:
            if k < 2:
                raise InvalidConfig(f"cluster ablation needs k >= 2, got {k}")
        if self.n_seeds < 1:
            raise InvalidConfig(f"n_seeds must be >= 1, got {self.n_seeds}")

    def strategy_names(self) -> List[str]:
        names = list(self.strategies) + [f"{ADAPTATION}_k{k}" for k in self.cluster_ks]
        return names + ([FULL] if self.include_full else [])


@dataclass(frozen=True)
class BenchCell:
    strategy: str
    alpha: float
    seed: int
    accuracy: float


@dataclass(frozen=True)
class BenchAggregate:
    strategy: str
    alpha: float
    mean: float
    std: float
    n: int


@dataclass
class BenchResult:
    cells: List[BenchCell] = field(default_factory=list)

    def sorted_cells(self) -> List[BenchCell]:
        return sorted(self.cells, key=lambda c: (c.strategy, c.alpha, c.seed))

    def accuracies(self, strategy: str, alpha: float) -> Dict[int, float]:
        return {c.seed: c.accuracy for c in self.cells if c.strategy == strategy and c.alpha == alpha}

    def aggregate(self) -> List[BenchAggregate]:
        groups: Dict[Tuple[str, float], List[float]] = {}
        for cell in self.sorted_cells():
            groups.setdefault((cell.strategy, cell.alpha), []).append(cell.accuracy)
        return [
            BenchAggregate(strategy, alpha, float(np.mean(acc)), float(np.std(acc)), len(acc))
            for (strategy, alpha), acc in sorted(groups.items())
        ]


@dataclass(frozen=True)
class PairedComparison:
    """``a`` vs ``b`` over seeds present for both; p-value of a one-sided sign test."""
    strategy_a: str
    strategy_b: str
    alpha: float
    mean_a: float
    mean_b: float
    wins: int
    losses: int
    ties: int
    p_value: float

    @property
    def mean_difference(self) -> float:
        return self.mean_a - self.mean_b


# ─────────────────────────────────────────────────────────────────────────────
# CELLS
# ─────────────────────────────────────────────────────────────────────────────

def evaluate(
    selected_ids: Iterable[str],
    dataset: SyntheticDataset,
    source_model: LogisticModel,
    cfg: Optional[ClassifierConfig] = None,
) -> float:
    """Reveal labels of ``selected_ids``, fine-tune the source model, score the target test splits."""
    pool_ids, _, pool_x = dataset.pool()
    row_of = {sample_id: i for i, sample_id in enumerate(pool_ids)}
    chosen = sorted(set(selected_ids))
    if not chosen:
        raise InvalidConfig("evaluation needs a nonempty selection")
    unknown = [i for i in chosen if i not in row_of]
    if unknown:
        raise UnknownId(f"{len(unknown)} selected id(s) are not in the pool (first: {unknown[0]})")
    x = pool_x[[row_of[i] for i in chosen]]
    y = np.array([dataset.oracle_labels[i] for i in chosen], dtype=np.int64)
    test_x, test_y = dataset.test_xy()
    return finetune(source_model, x, y, cfg).accuracy(test_x, test_y)


def _score_variants(cfg: BenchConfig) -> List[Tuple[str, str, int, Optional[float]]]:
    """(strategy, embedding variant, k, omega override) for every score-based strategy."""
    variants: List[Tuple[str, str, int, Optional[float]]] = []
    for name in cfg.strategies:
        if name == ADAPTATION:
            variants.append((name, "head", cfg.clustering.k, None))
        elif name == NO_RECONSTRUCTION:
            variants.append((name, "head", cfg.clustering.k, 0.0))
        elif name == BACKBONE_ONLY:
            variants.append((name, "raw", cfg.clustering.k, None))
    for k in cfg.cluster_ks:
        variants.append((f"{ADAPTATION}_k{k}", "head", k, None))
    return variants


def _embeddings(pairs: PairedPool, cfg: BenchConfig, seed: int, variant: str) -> Tuple[NDArray, NDArray]:
    """(z_u, z_r): trained student head, or the normalized raw features."""
    if variant == "raw":
        return normalize_rows(pairs.originals), normalize_rows(pairs.reconstructions)
    head = train_heads(pairs, dataclasses.replace(cfg.trainer, seed=seed))
    return embed_all(head, pairs.originals), embed_all(head, pairs.reconstructions)


def seed_dataset(spec: SyntheticSpec, seed: int) -> SyntheticDataset:
    """Dataset for bench seed ``seed``, generated with seed ``spec.seed + seed``."""
    return generate(dataclasses.replace(spec, seed=(spec.seed + seed) % 2 ** 64))


def _run_seed(seed: int, spec: SyntheticSpec, cfg: BenchConfig) -> List[BenchCell]:
    dataset = seed_dataset(spec, seed)
    source_x, source_y = dataset.source_xy()
    source_model = pretrain(source_x, source_y, cfg.classifier)
    pool_ids, _, pool_x = dataset.pool()
    cells: List[BenchCell] = []

    variants = _score_variants(cfg)
    if variants:
        pairs = build_pairs(dataset.manifest, dataset.features, "proxy", config=cfg.proxy)
        embedded: Dict[str, Tuple[NDArray, NDArray]] = {}
        models: Dict[Tuple[str, int], ClusterModel] = {}
        for name, variant, k, omega in variants:
            if variant not in embedded:
                embedded[variant] = _embeddings(pairs, cfg, seed, variant)
            z_u, z_r = embedded[variant]
            if (variant, k) not in models:
                models[(variant, k)] = fit(z_u, k=k, seed=seed, max_iters=cfg.clustering.max_iters, tol=cfg.clustering.tol)
            scoring = cfg.scoring if omega is None else dataclasses.replace(cfg.scoring, omega=omega)
            for alpha in cfg.alphas:
                report = select(
                    pairs.ids, pairs.domains, z_u, z_r, models[(variant, k)],
                    dataclasses.replace(scoring, alpha_percent=alpha),
                )
                accuracy = evaluate(report.selected_ids(), dataset, source_model, cfg.classifier)
                cells.append(BenchCell(name, alpha, seed, accuracy))

    for name in cfg.strategies:
        if name not in BASELINES:
            continue
        for alpha in cfg.alphas:
            chosen = baseline_select(name, pool_ids, pool_x, alpha, seed=seed, model=source_model, anchors=source_x)
            cells.append(BenchCell(name, alpha, seed, evaluate(chosen, dataset, source_model, cfg.classifier)))

    if cfg.include_full:
        cells.append(BenchCell(FULL, FULL_ALPHA, seed, evaluate(pool_ids, dataset, source_model, cfg.classifier)))
    logger.debug(f"seed {seed}: {len(cells)} cells")
    return cells


def run_benchmark(spec: SyntheticSpec, cfg: BenchConfig, threads: int = 1) -> BenchResult:
    """Every (strategy, alpha, seed) cell; seeds are spread over ``threads`` workers."""
    seeds = [cfg.base_seed + i for i in range(cfg.n_seeds)]
    logger.info(
        f"Benchmark: {len(cfg.strategy_names())} strategies x {len(cfg.alphas)} alphas x {len(seeds)} seeds"
    )
    per_seed = ordered_map(lambda s: _run_seed(s, spec, cfg), seeds, threads)
    result = BenchResult(cells=[cell for cells in per_seed for cell in cells])
    result.cells = result.sorted_cells()
    check_alpha_monotonicity(result)
    logger.info(f"Benchmark done: {len(result.cells)} cells")
    return result


def run_component_ablation(spec: SyntheticSpec, cfg: BenchConfig, threads: int = 1) -> BenchResult:
    cfg = dataclasses.replace(cfg, strategies=COMPONENT_ABLATION, cluster_ks=(), include_full=False)
    return run_benchmark(spec, cfg, threads)


def run_cluster_ablation(
    spec: SyntheticSpec,
    cfg: BenchConfig,
    ks: Sequence[int] = CLUSTER_ABLATION,
    threads: int = 1,
) -> BenchResult:
    cfg = dataclasses.replace(cfg, strategies=(), cluster_ks=tuple(ks), include_full=False)
    return run_benchmark(spec, cfg, threads)


# ─────────────────────────────────────────────────────────────────────────────
# ANALYSIS
# ─────────────────────────────────────────────────────────────────────────────

def compare_strategies(result: BenchResult, strategy_a: str, strategy_b: str, alpha: float) -> PairedComparison:
    """Paired per-seed comparison; the sign test asks whether ``a`` wins more often than chance."""
    acc_a = result.accuracies(strategy_a, alpha)
    acc_b = result.accuracies(strategy_b, alpha)
    seeds = sorted(set(acc_a) & set(acc_b))
    if not seeds:
        raise InvalidConfig(f"no paired seeds for {strategy_a} vs {strategy_b} at alpha {alpha}")
    diffs = np.array([acc_a[s] - acc_b[s] for s in seeds])
    wins = int(np.sum(diffs > 0))
    losses = int(np.sum(diffs < 0))
    ties = len(seeds) - wins - losses
    p_value = 1.0 if wins + losses == 0 else float(binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)
    return PairedComparison(
        strategy_a=strategy_a,
        strategy_b=strategy_b,
        alpha=alpha,
        mean_a=float(np.mean([acc_a[s] for s in seeds])),
        mean_b=float(np.mean([acc_b[s] for s in seeds])),
        wins=wins,
        losses=losses,
        ties=ties,
        p_value=p_value,
    )


def check_alpha_monotonicity(result: BenchResult) -> List[Tuple[str, float, float]]:
    """
    Flag (strategy, alpha_lo, alpha_hi) where mean accuracy drops by more
    than two standard errors as the budget grows. Violations are logged,
    never raised.
    """
    by_strategy: Dict[str, List[BenchAggregate]] = {}
    for agg in result.aggregate():
        by_strategy.setdefault(agg.strategy, []).append(agg)
    violations = []
    for strategy, aggs in sorted(by_strategy.items()):
        aggs = sorted(aggs, key=lambda a: a.alpha)
        for lo, hi in zip(aggs, aggs[1:]):
            stderr = math.sqrt(lo.std ** 2 / lo.n + hi.std ** 2 / hi.n)
            if hi.mean < lo.mean - 2.0 * stderr:
                violations.append((strategy, lo.alpha, hi.alpha))
                logger.warning(
                    f"{strategy}: mean accuracy falls from {lo.mean:.4f} (alpha {lo.alpha:g}) "
                    f"to {hi.mean:.4f} (alpha {hi.alpha:g})"
                )
    return violations


def write_cells_csv(result: BenchResult, path: Union[str, Path]) -> None:
    _write_rows(path, CELLS_HEADER, (
        [c.strategy, f"{c.alpha:g}", c.seed, f"{c.accuracy:.9g}"] for c in result.sorted_cells()
    ))


def write_summary_csv(result: BenchResult, path: Union[str, Path]) -> None:
    _write_rows(path, SUMMARY_HEADER, (
        [a.strategy, f"{a.alpha:g}", f"{a.mean:.9g}", f"{a.std:.9g}"] for a in result.aggregate()
    ))


def _write_rows(path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {path}")
