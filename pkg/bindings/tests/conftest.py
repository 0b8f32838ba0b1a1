import os

import numpy as np
import pytest

import localcascade as lc

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
DATA_DIR = os.path.join(REPO_ROOT, "tests", "data")


def data_path(name):
    return os.path.join(DATA_DIR, name)


@pytest.fixture(scope="session")
def iris_arrays():
    """Iris as plain arrays: (X_train, X_test, y_train, y_test)."""
    ds = lc.load_csv(data_path("iris.csv"), "species")
    train, test = lc.train_test_split(ds, 0.25, 0, stratified=True)
    return (
        np.asarray(train.features),
        np.asarray(test.features),
        np.asarray(train.labels),
        np.asarray(test.labels),
    )
