"""Shared seeded fixtures for the ADAptation test suite."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from bench import SyntheticSpec, generate  # noqa: E402
from reconproxy import build_pairs  # noqa: E402
from tinynet import TrainerConfig  # noqa: E402


def random_unit_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    rows = rng.normal(size=(n, d))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_spec():
    return SyntheticSpec(n_domains=2, samples_per_domain=40, feature_dim=8, shift=3.0, class_separation=4.0, seed=7)


@pytest.fixture
def small_dataset(small_spec):
    return generate(small_spec)


@pytest.fixture
def small_pairs(small_dataset):
    return build_pairs(small_dataset.manifest, small_dataset.features, "proxy")


@pytest.fixture
def tiny_trainer():
    return TrainerConfig(epochs=3, learning_rate=1e-3, batch_size=16, hidden_dim=16, embed_dim=8, seed=3)
