"""Synthetic domains, baselines, the downstream classifier and the benchmark harness."""

import csv
import dataclasses

import numpy as np
import pytest

from bench import (
    ADAPTATION,
    CELLS_HEADER,
    COMPONENT_ABLATION,
    FULL,
    SUMMARY_HEADER,
    BenchCell,
    BenchConfig,
    BenchResult,
    ClassifierConfig,
    LogisticModel,
    SyntheticSpec,
    baseline_select,
    check_alpha_monotonicity,
    compare_strategies,
    evaluate,
    farthest_first,
    finetune,
    generate,
    pretrain,
    run_benchmark,
    run_cluster_ablation,
    run_component_ablation,
    seed_dataset,
    write_cells_csv,
    write_summary_csv,
)
from guards import BudgetExceedsPool, InvalidConfig, UnknownId
from reconproxy import build_pairs, domain_bias
from tinynet import train_heads


# ═══════════════════════════════════════════════════════════════════════════════
# SYNTHETIC DOMAINS
# ═══════════════════════════════════════════════════════════════════════════════

def test_generate_is_deterministic(small_spec):
    a, b = generate(small_spec), generate(small_spec)
    assert np.array_equal(a.features.values, b.features.values)
    assert a.manifest == b.manifest
    assert a.oracle_labels == b.oracle_labels


def test_generate_splits(small_dataset):
    manifest = small_dataset.manifest
    assert len(manifest.select("source")) == 40
    assert len(manifest.select("test")) == 2 * 4
    assert len(manifest.select("pool")) == 2 * 36
    assert all(s.label is None for s in manifest.select("pool"))
    assert all(s.label is not None for s in manifest.select("test"))
    assert set(small_dataset.oracle_labels) == {s.id for s in manifest.select("pool")}
    assert manifest.domains() == ["source", "target_1", "target_2"]


def test_zero_shift_domains_show_no_bias():
    data = generate(SyntheticSpec(shift=0.0, seed=3))
    source = data.domain_features("source")
    report = domain_bias(source, {d: data.domain_features(d) for d in data.spec.target_domains()})
    for domain in data.spec.target_domains():
        sims = report.samples[domain]
        stderr = np.sqrt(np.var(sims) / sims.size + report.source_std ** 2 / source.shape[0])
        assert report.bias(domain) <= 4.0 * stderr


def test_spec_validation():
    with pytest.raises(InvalidConfig):
        SyntheticSpec(label_noise=0.5)
    with pytest.raises(InvalidConfig):
        SyntheticSpec(samples_per_domain=1)


def test_source_classifier_separates_wide_classes():
    data = generate(SyntheticSpec(n_domains=1, class_separation=8.0, feature_dim=8, seed=2))
    x, y = data.source_xy()
    assert pretrain(x, y).accuracy(x, y) >= 0.95


def test_finetune_leaves_source_model_untouched(small_dataset):
    x, y = small_dataset.source_xy()
    model = pretrain(x, y)
    before = model.weights.copy()
    tuned = finetune(model, x[:5], 1 - y[:5])
    assert np.array_equal(model.weights, before)
    assert not np.array_equal(tuned.weights, before)
    with pytest.raises(InvalidConfig):
        finetune(model, x[:0], y[:0])
    with pytest.raises(InvalidConfig):
        ClassifierConfig(learning_rate=0.0)


def test_finetune_moves_further_with_more_labels(small_dataset):
    x, y = small_dataset.source_xy()
    model = pretrain(x, y)
    few = finetune(model, x[:5], 1 - y[:5])
    many = finetune(model, np.vstack([x[:5]] * 4), np.tile(1 - y[:5], 4))
    moved_few = np.linalg.norm(few.weights - model.weights)
    moved_many = np.linalg.norm(many.weights - model.weights)
    assert moved_many > 2.0 * moved_few


def test_bench_seed_is_offset_by_spec_seed(small_spec):
    base = seed_dataset(small_spec, 0)
    assert np.array_equal(base.features.values, generate(small_spec).features.values)
    moved = seed_dataset(dataclasses.replace(small_spec, seed=small_spec.seed + 1), 0)
    assert np.array_equal(moved.features.values, seed_dataset(small_spec, 1).features.values)
    assert not np.array_equal(moved.features.values, base.features.values)
    top = dataclasses.replace(small_spec, seed=2 ** 64 - 1)
    assert np.array_equal(seed_dataset(top, 1).features.values,
                          generate(dataclasses.replace(small_spec, seed=0)).features.values)


# ═══════════════════════════════════════════════════════════════════════════════
# BASELINES
# ═══════════════════════════════════════════════════════════════════════════════

def _line_model():
    return LogisticModel(np.array([1.0]), 0.0, np.zeros(1), np.ones(1))


def test_random_baseline_is_seeded_and_order_free():
    ids = [f"p{i:02d}" for i in range(20)]
    x = np.arange(20, dtype=np.float64)[:, None]
    first = baseline_select("random", ids, x, 25.0, seed=5)
    assert first == baseline_select("random", ids, x, 25.0, seed=5)
    assert first == baseline_select("random", ids[::-1], x[::-1], 25.0, seed=5)
    assert len(first) == 5 and len(set(first)) == 5


def test_uncertainty_baselines_rank_by_closeness_to_the_boundary():
    ids = ["a", "b", "c", "d"]
    x = np.array([[0.0], [3.0], [-0.5], [1.0]])
    for strategy in ("margin", "entropy"):
        assert baseline_select(strategy, ids, x, 50.0, model=_line_model()) == ["a", "c"]
        assert baseline_select(strategy, ids, x, 0, model=_line_model(), budget=3) == ["a", "c", "d"]
    with pytest.raises(InvalidConfig):
        baseline_select("entropy", ids, x, 50.0)


def test_farthest_first_on_a_line():
    x = np.arange(11, dtype=np.float64)[:, None]
    assert farthest_first(x, 3) == [0, 10, 5]
    assert farthest_first(x, 1, anchors=np.array([[0.0]])) == [10]
    ids = [f"p{i:02d}" for i in range(11)]
    assert baseline_select("farthest_first", ids, x, 0, budget=2) == ["p00", "p10"]


def test_budget_must_fit_the_pool():
    ids = ["a", "b", "c", "d"]
    x = np.zeros((4, 2))
    with pytest.raises(BudgetExceedsPool):
        baseline_select("random", ids, x, 0, budget=5)
    with pytest.raises(BudgetExceedsPool):
        baseline_select("random", [], np.zeros((0, 2)), 50.0)
    with pytest.raises(InvalidConfig):
        baseline_select("coin_flip", ids, x, 50.0)


# ═══════════════════════════════════════════════════════════════════════════════
# EVALUATION
# ═══════════════════════════════════════════════════════════════════════════════

def test_evaluate(small_dataset):
    x, y = small_dataset.source_xy()
    model = pretrain(x, y)
    pool_ids = small_dataset.pool()[0]
    forward = evaluate(pool_ids, small_dataset, model)
    assert 0.0 <= forward <= 1.0
    assert evaluate(pool_ids[::-1], small_dataset, model) == forward
    with pytest.raises(UnknownId):
        evaluate(["nope"], small_dataset, model)
    with pytest.raises(InvalidConfig):
        evaluate([], small_dataset, model)


def _bench_config(tiny_trainer, **overrides):
    base = dict(
        strategies=(ADAPTATION, "random", "farthest_first"),
        alphas=(20.0, 50.0),
        n_seeds=2,
        trainer=tiny_trainer,
    )
    base.update(overrides)
    return BenchConfig(**base)


def test_bench_config_validation(tiny_trainer):
    with pytest.raises(InvalidConfig):
        _bench_config(tiny_trainer, strategies=("oracle",))
    with pytest.raises(InvalidConfig):
        _bench_config(tiny_trainer, alphas=(100.0,))
    with pytest.raises(InvalidConfig):
        _bench_config(tiny_trainer, n_seeds=0)
    assert _bench_config(tiny_trainer, cluster_ks=(3,)).strategy_names() == [
        ADAPTATION, "random", "farthest_first", f"{ADAPTATION}_k3", FULL,
    ]


def test_small_benchmark(small_spec, tiny_trainer):
    cfg = _bench_config(tiny_trainer)
    result = run_benchmark(small_spec, cfg, threads=1)
    assert len(result.cells) == 2 * (3 * 2 + 1)
    assert all(0.0 <= c.accuracy <= 1.0 for c in result.cells)
    assert {c.seed for c in result.cells} == {0, 1}
    assert [c for c in result.cells if c.strategy == FULL][0].alpha == 100.0

    assert run_benchmark(small_spec, cfg, threads=2).cells == result.cells


def test_ablation_strategy_sets(small_spec, tiny_trainer):
    cfg = _bench_config(tiny_trainer, n_seeds=1, alphas=(50.0,))
    components = run_component_ablation(small_spec, cfg)
    assert {c.strategy for c in components.cells} == set(COMPONENT_ABLATION)
    clusters = run_cluster_ablation(small_spec, cfg, ks=(2, 3))
    assert {c.strategy for c in clusters.cells} == {f"{ADAPTATION}_k2", f"{ADAPTATION}_k3"}


# ═══════════════════════════════════════════════════════════════════════════════
# ANALYSIS AND REPORTS
# ═══════════════════════════════════════════════════════════════════════════════

def _result(table):
    return BenchResult(cells=[
        BenchCell(strategy, alpha, seed, acc)
        for (strategy, alpha), accs in table.items()
        for seed, acc in enumerate(accs)
    ])


def test_compare_strategies_sign_test():
    result = _result({
        ("a", 20.0): [0.9, 0.8, 0.7, 0.6, 0.5],
        ("b", 20.0): [0.5, 0.5, 0.5, 0.9, 0.5],
    })
    cmp = compare_strategies(result, "a", "b", 20.0)
    assert (cmp.wins, cmp.losses, cmp.ties) == (3, 1, 1)
    assert cmp.p_value == pytest.approx(0.3125)
    assert cmp.mean_difference == pytest.approx(0.12)
    with pytest.raises(InvalidConfig):
        compare_strategies(result, "a", "b", 50.0)


def test_all_ties_give_p_value_one():
    result = _result({("a", 20.0): [0.5, 0.6], ("b", 20.0): [0.5, 0.6]})
    assert compare_strategies(result, "a", "b", 20.0).p_value == 1.0


def test_alpha_monotonicity_flags_clear_drops():
    result = _result({
        ("x", 20.0): [0.9, 0.91, 0.89],
        ("x", 50.0): [0.5, 0.52, 0.48],
        ("y", 20.0): [0.6, 0.7, 0.65],
        ("y", 50.0): [0.64, 0.66, 0.62],
    })
    assert check_alpha_monotonicity(result) == [("x", 20.0, 50.0)]


def test_aggregate_and_csv(tmp_path):
    result = _result({("a", 20.0): [0.5, 0.7], ("a", 50.0): [0.8, 0.8]})
    aggs = result.aggregate()
    assert [(a.alpha, a.n) for a in aggs] == [(20.0, 2), (50.0, 2)]
    assert aggs[0].mean == pytest.approx(0.6)
    assert aggs[0].std == pytest.approx(0.1)

    write_cells_csv(result, tmp_path / "cells.csv")
    write_summary_csv(result, tmp_path / "summary.csv")
    with open(tmp_path / "cells.csv", newline="") as fh:
        cells = list(csv.reader(fh))
    with open(tmp_path / "summary.csv", newline="") as fh:
        summary = list(csv.reader(fh))
    assert cells[0] == CELLS_HEADER and len(cells) == 5
    assert cells[1] == ["a", "20", "0", "0.5"]
    assert summary[0] == SUMMARY_HEADER and len(summary) == 3


# ═══════════════════════════════════════════════════════════════════════════════
# DEFAULT SHIFTED SPEC
# ═══════════════════════════════════════════════════════════════════════════════

def test_bench_trainer_converges_on_default_pairs():
    data = generate(SyntheticSpec())
    pairs = build_pairs(data.manifest, data.features, "proxy")
    history = train_heads(pairs, BenchConfig().trainer).loss_history
    assert len(history) == 50
    moving = np.convolve(history, np.ones(5) / 5, mode="valid")
    assert np.all(np.diff(moving) <= 1e-2 * history[0])
    assert history[-1] < 0.1 * history[0]


def test_adaptation_beats_random_at_twenty_percent():
    cfg = BenchConfig(strategies=(ADAPTATION, "random"), alphas=(20.0,), include_full=False)
    result = run_benchmark(SyntheticSpec(), cfg, threads=4)
    cmp = compare_strategies(result, ADAPTATION, "random", 20.0)
    assert cmp.wins + cmp.losses + cmp.ties == 20
    assert cmp.mean_a >= cmp.mean_b
    assert cmp.p_value < 0.05
