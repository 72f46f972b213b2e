"""Hypersphere primitives, the angular loss and its analytic gradient."""

import math

import numpy as np
import pytest

from geometry import (
    LossConfig,
    angles_between,
    angular_loss,
    angular_loss_grad,
    angular_loss_grad_batch,
    is_unit,
    loss_floor,
    normalize,
    normalize_rows,
    ordered_map,
    row_chunks,
    spherical_distance,
)
from guards import DimensionMismatch, EmptyBatch, InvalidConfig, ZeroVector


def test_normalize_gives_unit_vector(rng):
    for _ in range(20):
        v = rng.normal(size=16) * rng.uniform(1e-3, 1e3)
        assert is_unit(normalize(v))


def test_normalize_is_exactly_scale_invariant_for_powers_of_two(rng):
    v = rng.normal(size=32)
    for c in (0.25, 2.0, 1024.0):
        assert np.array_equal(normalize(c * v), normalize(v))


def test_normalize_rejects_zero_and_short_vectors():
    with pytest.raises(ZeroVector):
        normalize(np.zeros(4))
    with pytest.raises(ZeroVector):
        normalize(np.full(4, 1e-14))
    with pytest.raises(DimensionMismatch):
        normalize(np.array([1.0]))


def test_normalize_rows_names_bad_row():
    with pytest.raises(ZeroVector, match="row 1"):
        normalize_rows(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_spherical_distance_examples():
    e0, e1 = np.eye(3)[0], np.eye(3)[1]
    assert spherical_distance(e0, e0) <= math.acos(1 - 1e-7) + 1e-15
    assert spherical_distance(e0, e1) == pytest.approx(math.pi / 2, abs=1e-12)
    assert spherical_distance(e0, -e0) == pytest.approx(math.pi, abs=1e-3)
    with pytest.raises(DimensionMismatch):
        spherical_distance(e0, np.ones(4) / 2)


def test_spherical_distance_symmetric(rng):
    for _ in range(50):
        a, b = normalize(rng.normal(size=8)), normalize(rng.normal(size=8))
        assert spherical_distance(a, b) == spherical_distance(b, a)


def test_angles_between_in_range(rng):
    centers = normalize_rows(rng.normal(size=(5, 6)))
    z = normalize(rng.normal(size=6))
    angles = angles_between(z, centers)
    assert angles.shape == (5,)
    assert np.all((angles >= 0) & (angles <= math.pi))


def test_loss_identities():
    cfg = LossConfig()
    f = np.array([[1.0, 0.0, 0.0]])
    assert angular_loss(f, f, cfg) <= loss_floor(cfg) + 1e-15
    g = np.array([[0.0, 1.0, 0.0]])
    assert angular_loss(f, g, cfg) == pytest.approx(4 * math.pi ** 2, abs=1e-9)


def test_loss_rejects_empty_and_mismatched_batches():
    with pytest.raises(EmptyBatch):
        angular_loss(np.zeros((0, 3)), np.zeros((0, 3)))
    with pytest.raises(DimensionMismatch):
        angular_loss(np.ones((2, 3)), np.ones((2, 4)))


def test_loss_config_validation():
    with pytest.raises(InvalidConfig):
        LossConfig(m=0.0)
    with pytest.raises(InvalidConfig):
        LossConfig(eps_clamp=0.0)


def _pair_with_bounded_cosine(rng, d=8, bound=0.99):
    while True:
        f, g = rng.normal(size=d), rng.normal(size=d)
        cos = f @ g / (np.linalg.norm(f) * np.linalg.norm(g))
        if -bound <= cos <= bound:
            return f, g


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(2024)
    cfg = LossConfig()
    h = 1e-5

    def loss(f, g):
        return angular_loss(f[None, :], g[None, :], cfg)

    for _ in range(1000):
        f, g = _pair_with_bounded_cosine(rng)
        grad_f, grad_g = angular_loss_grad(f, g, cfg)
        for vec, grad, is_f in ((f, grad_f, True), (g, grad_g, False)):
            for j in range(vec.shape[0]):
                plus, minus = vec.copy(), vec.copy()
                plus[j] += h
                minus[j] -= h
                if is_f:
                    fd = (loss(plus, g) - loss(minus, g)) / (2 * h)
                else:
                    fd = (loss(f, plus) - loss(f, minus)) / (2 * h)
                assert abs(fd - grad[j]) <= 1e-4 * abs(grad[j]) + 1e-6


def test_gradient_zero_outside_clamp():
    f = np.array([[1.0, 0.0]])
    grad_f, grad_g = angular_loss_grad_batch(f, f)
    assert np.all(grad_f == 0) and np.all(grad_g == 0)


def test_batch_gradient_is_mean_of_pair_gradients(rng):
    f, g = rng.normal(size=(4, 6)), rng.normal(size=(4, 6))
    grad_f, _ = angular_loss_grad_batch(f, g)
    for i in range(4):
        single, _ = angular_loss_grad(f[i], g[i])
        np.testing.assert_allclose(grad_f[i], single / 4, rtol=1e-12, atol=1e-15)


def test_ordered_map_keeps_order_for_any_thread_count():
    items = list(range(100))
    expected = [x * x for x in items]
    for threads in (1, 2, 8):
        assert ordered_map(lambda x: x * x, items, threads) == expected


def test_row_chunks_cover_range():
    chunks = row_chunks(130, 64)
    assert [(c.start, c.stop) for c in chunks] == [(0, 64), (64, 128), (128, 130)]
    assert row_chunks(0) == []
