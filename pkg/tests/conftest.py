from pathlib import Path

import numpy as np
import pytest

from mimcs import dataset

PIMA_PATH = Path(__file__).resolve().parents[1] / "data" / "pima-indians-diabetes.data"


@pytest.fixture(scope="session")
def pima_path():
    return PIMA_PATH


@pytest.fixture(scope="session")
def pima():
    return dataset.to_matrix(dataset.load_csv(PIMA_PATH))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def blobs(n_per_class=10, gap=4.0, d=2, seed=0):
    """Two well separated Gaussian clouds, labels +1 / -1."""
    r = np.random.default_rng(seed)
    pos = r.normal(size=(n_per_class, d)) * 0.5 + gap / 2
    neg = r.normal(size=(n_per_class, d)) * 0.5 - gap / 2
    X = np.vstack([pos, neg])
    y = np.r_[np.ones(n_per_class), -np.ones(n_per_class)]
    return dataset.SampleMatrix(X, y)


def toy(n_pos=35, n_neg=65, seed=0):
    """Eight raw features, the first three informative, labels +1 / -1."""
    r = np.random.default_rng(seed)
    X = r.normal(size=(n_pos + n_neg, 8)) * [1, 2, 3, 1, 1, 5, 0.5, 10] + 50
    y = np.r_[np.ones(n_pos), -np.ones(n_neg)]
    X[:n_pos, :3] += [1.5, 3.0, 4.0]
    perm = r.permutation(y.size)
    return dataset.SampleMatrix(X[perm], y[perm])


FAST = dict(budget=40, n_nests=10, fitness_mode="train", folds=4, holdout_size=20)
