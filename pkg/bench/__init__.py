"""
ADAptation Benchmark
Synthetic shifted domains, baseline acquisition strategies, a logistic
downstream classifier and accuracy-vs-budget reporting.
"""

from .baselines import BASELINES, baseline_select, farthest_first
from .classifier import ClassifierConfig, LogisticModel, finetune, pretrain
from .harness import (
    ADAPTATION,
    BACKBONE_ONLY,
    CELLS_HEADER,
    CLUSTER_ABLATION,
    COMPONENT_ABLATION,
    FULL,
    NO_RECONSTRUCTION,
    SUMMARY_HEADER,
    BenchAggregate,
    BenchCell,
    BenchConfig,
    BenchResult,
    PairedComparison,
    check_alpha_monotonicity,
    compare_strategies,
    evaluate,
    run_benchmark,
    run_cluster_ablation,
    run_component_ablation,
    seed_dataset,
    write_cells_csv,
    write_summary_csv,
)
from .synthetic import SOURCE_DOMAIN, SyntheticDataset, SyntheticSpec, generate

__all__ = [
    "ADAPTATION",
    "BACKBONE_ONLY",
    "BASELINES",
    "CELLS_HEADER",
    "CLUSTER_ABLATION",
    "COMPONENT_ABLATION",
    "FULL",
    "NO_RECONSTRUCTION",
    "SOURCE_DOMAIN",
    "SUMMARY_HEADER",
    "BenchAggregate",
    "BenchCell",
    "BenchConfig",
    "BenchResult",
    "ClassifierConfig",
    "LogisticModel",
    "PairedComparison",
    "SyntheticDataset",
    "SyntheticSpec",
    "baseline_select",
    "check_alpha_monotonicity",
    "compare_strategies",
    "evaluate",
    "farthest_first",
    "finetune",
    "generate",
    "pretrain",
    "run_benchmark",
    "run_cluster_ablation",
    "run_component_ablation",
    "seed_dataset",
    "write_cells_csv",
    "write_summary_csv",
]
