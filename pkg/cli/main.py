"""
ADAptation Command Line
=======================
Subcommands over one shared run config.

    gen      synthetic multi-domain dataset (features, manifest, hidden labels)
    train    teacher-student head on (pool, reconstruction) pairs
    select   embed, cluster, score and flag the top alpha% of the pool
    bench    accuracy-vs-budget benchmark and ablations
    analyze  cross-domain similarity bias before and after homogenization

Exit status is 0 on success, the error's own code for pipeline errors and
1 for anything unexpected.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from bench import (
    ADAPTATION,
    compare_strategies,
    generate,
    run_benchmark,
    run_cluster_ablation,
    run_component_ablation,
    write_cells_csv,
    write_summary_csv,
)
from clustering import fit, save_cluster_model, sphere_projection_3d
from dataio import load_manifest, read_features, save_manifest, write_features
from guards import AdaptationError, DataIOError, EmptySet, exit_code_table
from reconproxy import build_pairs, domain_bias, write_bias_csv, write_similarity_csv
from selection import select, write_selection_csv
from tinynet import embed_all, load_head, save_head, train_heads

from .config import RunConfig, config_field_help, load_run_config, settings

logger = logging.getLogger("adaptation.cli")


# ═══════════════════════════════════════════════════════════════════════════════
# STRUCTURED LOGGING
# ═══════════════════════════════════════════════════════════════════════════════

def _setup_logging(level_name: str) -> None:
    """Configure structured logging for the process."""
    log_level = getattr(logging, level_name.upper(), logging.INFO)

    formatter = logging.Formatter(
        fmt="%(asctime)s | %(levelname)-7s | %(name)-24s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(formatter)

    root = logging.getLogger()
    root.setLevel(log_level)
    root.handlers.clear()
    root.addHandler(handler)


# ═══════════════════════════════════════════════════════════════════════════════
# HELPERS
# ═══════════════════════════════════════════════════════════════════════════════

def _ensure_out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.paths.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataIOError(f"cannot create output dir {out}: {exc}") from exc
    return out


def _load_inputs(cfg: RunConfig):
    features = read_features(cfg.paths.features_path())
    manifest = load_manifest(cfg.paths.manifest_path(), n_rows=features.n)
    return features, manifest


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


# ═══════════════════════════════════════════════════════════════════════════════
# COMMANDS
# ═══════════════════════════════════════════════════════════════════════════════

def cmd_gen(cfg: RunConfig) -> int:
    out = _ensure_out_dir(cfg)
    dataset = generate(cfg.synthetic)
    write_features(dataset.features, cfg.paths.features_path())
    save_manifest(dataset.manifest, cfg.paths.manifest_path())
    labels_path = out / "oracle_labels.json"
    try:
        labels_path.write_text(json.dumps(dataset.oracle_labels, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {labels_path}: {exc}") from exc
    logger.info(f"Wrote {dataset.features.n} feature rows and manifest to {out}")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    _ensure_out_dir(cfg)
    features, manifest = _load_inputs(cfg)
    pairs = build_pairs(manifest, features, cfg.provider, config=cfg.proxy, threads=cfg.threads)
    head = train_heads(pairs, cfg.trainer_config())
    print("epoch,loss")
    for epoch, loss in enumerate(head.loss_history):
        print(f"{epoch},{loss:.9g}")
    save_head(head, cfg.paths.checkpoint_path())
    return 0


def cmd_select(cfg: RunConfig) -> int:
    out = _ensure_out_dir(cfg)
    features, manifest = _load_inputs(cfg)
    head = load_head(cfg.paths.checkpoint_path(), expected_embed_dim=cfg.trainer.embed_dim)
    pairs = build_pairs(manifest, features, cfg.provider, config=cfg.proxy, threads=cfg.threads)

    z_u = embed_all(head, pairs.originals, use=cfg.embed_with, threads=cfg.threads)
    z_r = embed_all(head, pairs.reconstructions, use="student", threads=cfg.threads)
    model = fit(
        z_u,
        k=cfg.clustering.k,
        seed=cfg.clustering.seed,
        max_iters=cfg.clustering.max_iters,
        tol=cfg.clustering.tol,
        threads=cfg.threads,
    )
    save_cluster_model(model, out / "clusters.ckpt")

    report = select(pairs.ids, pairs.domains, z_u, z_r, model, cfg.scoring, threads=cfg.threads)
    write_selection_csv(report, out / "selection.csv")

    cluster = [int(c) for c in model.assignments]
    _write_csv(
        out / "embeddings.csv",
        ["id", "domain", "cluster"] + [f"z{j}" for j in range(z_u.shape[1])],
        ([pairs.ids[i], pairs.domains[i], cluster[i]] + [f"{v:.9g}" for v in z_u[i]] for i in range(pairs.n)),
    )
    coords = sphere_projection_3d(z_u)
    _write_csv(
        out / "sphere3d.csv",
        ["id", "domain", "cluster", "x", "y", "z"],
        ([pairs.ids[i], pairs.domains[i], cluster[i]] + [f"{v:.9g}" for v in coords[i]] for i in range(pairs.n)),
    )
    logger.info(f"Selection written to {out}: {len(report.selected_ids())}/{report.n} flagged")
    return 0


def cmd_bench(cfg: RunConfig, ablation: str = "none") -> int:
    out = _ensure_out_dir(cfg)
    bench_cfg = cfg.bench_config()
    if ablation == "components":
        result = run_component_ablation(cfg.synthetic, bench_cfg, cfg.threads)
    elif ablation == "clusters":
        result = run_cluster_ablation(cfg.synthetic, bench_cfg, threads=cfg.threads)
    else:
        result = run_benchmark(cfg.synthetic, bench_cfg, cfg.threads)
    write_cells_csv(result, out / "bench_cells.csv")
    write_summary_csv(result, out / "bench_summary.csv")

    print("strategy,alpha,mean,std")
    for agg in result.aggregate():
        print(f"{agg.strategy},{agg.alpha:g},{agg.mean:.9g},{agg.std:.9g}")
    if ablation == "none" and ADAPTATION in bench_cfg.strategies and "random" in bench_cfg.strategies:
        for alpha in bench_cfg.alphas:
            cmp = compare_strategies(result, ADAPTATION, "random", alpha)
            logger.info(
                f"{ADAPTATION} vs random at {alpha:g}%: {cmp.mean_a:.4f} vs {cmp.mean_b:.4f}, "
                f"{cmp.wins}W/{cmp.losses}L/{cmp.ties}T, sign-test p={cmp.p_value:.4g}"
            )
    return 0


def cmd_analyze(cfg: RunConfig) -> int:
    out = _ensure_out_dir(cfg)
    features, manifest = _load_inputs(cfg)
    source_rows = [s.feature_row for s in manifest.select("source")]
    if not source_rows:
        raise EmptySet("manifest has no source samples")
    source = features.rows(source_rows).reshape(len(source_rows), features.d)

    pairs = build_pairs(manifest, features, cfg.provider, config=cfg.proxy, threads=cfg.threads)
    domains = np.asarray(pairs.domains, dtype=object)
    targets = manifest.domains("pool")
    original = {d: pairs.originals[domains == d] for d in targets}
    homogenized = {d: pairs.reconstructions[domains == d] for d in targets}

    reports = {
        "original": domain_bias(source, original, manifest.source_domain),
        "homogenized": domain_bias(source, homogenized, manifest.source_domain),
    }
    write_bias_csv(reports, out / "bias.csv")
    for stage, report in reports.items():
        write_similarity_csv(report, out / f"similarity_{stage}.csv")

    print("domain,stage,mean,std,bias")
    for stage, report in reports.items():
        for row in report.rows:
            print(f"{row.domain},{stage},{row.mean:.9g},{row.std:.9g},{row.bias:.9g}")
    return 0


# ═══════════════════════════════════════════════════════════════════════════════
# ARGUMENTS
# ═══════════════════════════════════════════════════════════════════════════════

# flag dest -> dotted config key
FLAG_KEYS: Dict[str, str] = {
    "out_dir": "paths.out_dir",
    "features": "paths.features",
    "manifest": "paths.manifest",
    "checkpoint": "paths.checkpoint",
    "provider": "provider",
    "threads": "threads",
    "epochs": "trainer.epochs",
    "lr": "trainer.learning_rate",
    "batch_size": "trainer.batch_size",
    "hidden_dim": "trainer.hidden_dim",
    "embed_dim": "trainer.embed_dim",
    "m": "loss.m",
    "k": "clustering.k",
    "alpha": "scoring.alpha_percent",
    "omega": "scoring.omega",
    "uncertainty_mode": "scoring.uncertainty_mode",
    "combine_mode": "scoring.combine_mode",
    "blend": "proxy.blend",
    "embed_with": "embed_with",
    "n_domains": "synthetic.n_domains",
    "samples_per_domain": "synthetic.samples_per_domain",
    "feature_dim": "synthetic.feature_dim",
    "shift": "synthetic.shift",
    "emit_recon": "synthetic.emit_recon",
    "n_seeds": "bench.n_seeds",
    "alphas": "bench.alphas",
    "strategies": "bench.strategies",
}

SEED_KEYS = ("trainer.seed", "clustering.seed", "synthetic.seed", "bench.base_seed")


def build_parser() -> argparse.ArgumentParser:
    epilog = "config fields (defaults):\n" + "\n".join(config_field_help())
    epilog += "\n\nexit codes:\n" + "\n".join(f"  {code:3d}  {name}" for name, code in exit_code_table().items())
    parser = argparse.ArgumentParser(
        prog="adaptation",
        description="Unsupervised active learning under domain shift.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--features")
    common.add_argument("--manifest")
    common.add_argument("--checkpoint")
    common.add_argument("--provider", choices=["proxy", "external"])
    common.add_argument("--blend", type=float, help="proxy blend in [0, 1]")
    common.add_argument("--threads", type=int, help="worker cap; output does not depend on it")
    common.add_argument("--seed", type=int, help="sets every seed of the run")
    common.add_argument("--log-level", dest="log_level")

    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="write a synthetic dataset")
    gen.add_argument("--n-domains", dest="n_domains", type=int)
    gen.add_argument("--samples-per-domain", dest="samples_per_domain", type=int)
    gen.add_argument("--feature-dim", dest="feature_dim", type=int)
    gen.add_argument("--shift", type=float)
    gen.add_argument("--emit-recon", dest="emit_recon", action="store_true", default=None)

    train = sub.add_parser("train", parents=[common], help="train the projection head")
    train.add_argument("--epochs", type=int)
    train.add_argument("--lr", type=float)
    train.add_argument("--batch-size", dest="batch_size", type=int)
    train.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    train.add_argument("--embed-dim", dest="embed_dim", type=int)
    train.add_argument("--m", type=float, help="angular scaling factor")

    sel = sub.add_parser("select", parents=[common], help="score and select the pool")
    sel.add_argument("--embed-dim", dest="embed_dim", type=int)
    sel.add_argument("--k", type=int)
    sel.add_argument("--alpha", type=float)
    sel.add_argument("--omega", type=float)
    sel.add_argument("--uncertainty-mode", dest="uncertainty_mode", choices=["pairwise_min", "range"])
    sel.add_argument("--combine-mode", dest="combine_mode", choices=["raw", "rank"])
    sel.add_argument("--embed-with", dest="embed_with", choices=["student", "teacher"])

    bench = sub.add_parser(
        "bench", parents=[common], help="accuracy-vs-budget benchmark",
        description="Bench seed s generates its dataset with seed synthetic.seed + s.",
    )
    bench.add_argument("--n-seeds", dest="n_seeds", type=int)
    bench.add_argument("--alphas", type=float, nargs="+")
    bench.add_argument("--strategies", nargs="+")
    bench.add_argument("--epochs", type=int)
    bench.add_argument("--ablation", choices=["none", "components", "clusters"], default="none")

    sub.add_parser("analyze", parents=[common], help="cross-domain similarity bias")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = vars(args)
    overrides = {key: values[dest] for dest, key in FLAG_KEYS.items() if values.get(dest) is not None}
    if args.command == "bench" and "trainer.epochs" in overrides:
        overrides["bench.trainer.epochs"] = overrides.pop("trainer.epochs")
    if values.get("seed") is not None:
        for key in SEED_KEYS:
            overrides[key] = args.seed
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_level or settings.LOG_LEVEL)
    try:
        cfg = load_run_config(args.config, _overrides(args))
        if args.command == "gen":
            return cmd_gen(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "select":
            return cmd_select(cfg)
        if args.command == "bench":
            return cmd_bench(cfg, args.ablation)
        return cmd_analyze(cfg)
    except AdaptationError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except Exception:
        logger.exception("unexpected failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
