import os

import numpy as np
import pytest

from deepmlc.data import Dataset

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def real_data_dir():
    return os.environ.get("DEEPMLC_DATA_DIR", os.path.join(REPO_ROOT, "data"))


def require_dataset(name):
    """Path to a real benchmark ARFF, or skip the test if it is not present."""
    path = os.path.join(real_data_dir(), f"{name}.arff")
    if not os.path.exists(path):
        pytest.skip(f"benchmark dataset {name}.arff not found in {real_data_dir()} "
                    f"(set DEEPMLC_DATA_DIR or run scripts/fetch_datasets.py)")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(X, Y, name="fixture"):
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y)
    return Dataset(name, X, Y,
                   tuple(f"x{i}" for i in range(X.shape[1])),
                   tuple(f"y{i}" for i in range(Y.shape[1])))


@pytest.fixture
def small_ds(rng):
    """50 instances, 5 features, 4 labels with learnable linear structure."""
    import helpers
    X, Y = helpers.random_learnable_multilabel(rng, n=50, d=5, n_labels=4)
    return make_dataset(X, Y, name="small")
