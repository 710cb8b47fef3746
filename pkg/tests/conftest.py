"""Shared model builders for the test suite.

The four named models cover the corners we care about: a product measure
with and without site weights (closed-form entropy), a hard constraint
with positive entropy (hard squares), and a hard constraint with zero
entropy (agreement, only the two constant configurations survive).
"""

import numpy as np
import pytest

from gibbsbound.model import InteractionModel


def build(payload):
    return InteractionModel.from_payload(payload)


def uniform_binary_payload():
    return {
        "dimension": 2,
        "alphabet": ["0", "1"],
        "gamma": {"0": 1.0, "1": 1.0},
        "beta": [[[1, 1], [1, 1]], [[1, 1], [1, 1]]],
    }


def weighted_iid_payload():
    return {
        "dimension": 2,
        "alphabet": ["a", "b"],
        "gamma": {"a": 1.0, "b": 2.0},
        "beta": [[[1, 1], [1, 1]], [[1, 1], [1, 1]]],
    }


def hard_squares_payload():
    return {
        "dimension": 2,
        "alphabet": ["0", "1"],
        "gamma": {"0": 1.0, "1": 1.0},
        "beta": [[[1, 1], [1, 0]], [[1, 1], [1, 0]]],
    }


def agreement_payload():
    return {
        "dimension": 2,
        "alphabet": ["0", "1"],
        "gamma": {"0": 1.0, "1": 1.0},
        "beta": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]],
    }


@pytest.fixture(scope="session")
def uniform_binary():
    return build(uniform_binary_payload())


@pytest.fixture(scope="session")
def weighted_iid():
    return build(weighted_iid_payload())


@pytest.fixture(scope="session")
def hard_squares():
    return build(hard_squares_payload())


@pytest.fixture(scope="session")
def agreement():
    return build(agreement_payload())


def random_sparse_model(rng, q):
    """Random q-symbol model with sparse edge weights, never fully dead.

    Symbol 0 is kept self-compatible along both axes so at least the
    all-zero configuration has positive weight in every volume.
    """
    symbols = [str(i) for i in range(q)]
    gamma = {s: float(rng.uniform(0.25, 2.0)) for s in symbols}
    beta = []
    for _ in range(2):
        mat = rng.uniform(0.25, 2.0, size=(q, q))
        mask = rng.random((q, q)) < 0.35
        mat[mask] = 0.0
        mat[0, 0] = max(mat[0, 0], 0.5)
        beta.append(mat.tolist())
    return build({
        "dimension": 2,
        "alphabet": symbols,
        "gamma": gamma,
        "beta": beta,
    })
