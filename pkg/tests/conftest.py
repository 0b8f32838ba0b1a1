import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make `oracles` importable

import localcascade as lc

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(name):
    return os.path.join(DATA_DIR, name)


@pytest.fixture(scope="session")
def iris():
    return lc.load_csv(data_path("iris.csv"), "species")


@pytest.fixture(scope="session")
def wine():
    return lc.load_csv(data_path("wine.csv"), "wine_class")


@pytest.fixture(scope="session")
def breast_cancer():
    return lc.load_csv(data_path("breast_cancer.csv"), "diagnosis")


def separable_toy(n=50, seed=0):
    """Two classes split perfectly by the sign of the first feature."""
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.uniform(-3, -0.5, n // 2), rng.uniform(0.5, 3, n - n // 2)])
    noise = rng.normal(size=len(x))
    X = np.column_stack([x, noise])
    y = (x >= 0).astype(np.int64)
    return X, y


@pytest.fixture(scope="session")
def toy_classification():
    return separable_toy()


@pytest.fixture(scope="session")
def iris_small_model(iris):
    """One modest fitted model shared by read-only tests."""
    train, test = lc.train_test_split(iris, 0.25, 0, stratified=True)
    config = lc.LCEConfig(
        n_estimators=4, cascade=lc.CascadeConfig(max_depth=2), seed=0, parallelism=1
    )
    return lc.fit(train, config), train, test
