"""Estimator-style wrappers: LCEClassifier and LCERegressor.

Thin delegation layer over the localcascade library, mirroring the familiar
fit / predict / predict_proba surface. Feature matrices are plain 2-D numeric
arrays in which NaN marks a missing value; they cross the boundary with at
most one copy (a dtype-preserving view when possible). Array columns are
named x0..x{n-1} in saved model files. No learning logic lives here.
"""

from __future__ import annotations

import numpy as np

from localcascade import (
    CLASSIFICATION,
    REGRESSION,
    CascadeConfig,
    Dataset,
    LCEConfig,
)
from localcascade import ensemble as _core
from localcascade import model_io as _model_io


class NotFittedError(RuntimeError):
    """predict/predict_proba called before fit."""


class _BaseEstimator:
    _task = None
    _param_names = (
        "n_estimators",
        "max_depth",
        "min_samples_split",
        "min_samples_leaf",
        "tuning_budget",
        "n_jobs",
        "random_state",
    )

    def __init__(
        self,
        n_estimators=10,
        max_depth=2,
        min_samples_split=2,
        min_samples_leaf=1,
        tuning_budget=3,
        n_jobs=None,
        random_state=0,
    ):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.tuning_budget = tuning_budget
        self.n_jobs = n_jobs
        self.random_state = random_state
        self._model = None

    # -- parameter surface ------------------------------------------------

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params):
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    def _config(self):
        if self.n_jobs in (-1, None):
            parallelism = None  # all cores
        elif self.n_jobs >= 1:
            parallelism = int(self.n_jobs)
        else:
            raise ValueError(f"n_jobs must be -1, None, or >= 1, got {self.n_jobs}")
        return LCEConfig(
            n_estimators=self.n_estimators,
            cascade=CascadeConfig(
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                min_samples_leaf=self.min_samples_leaf,
                tuning_budget=self.tuning_budget,
                task=self._task,
            ),
            seed=self.random_state,
            parallelism=parallelism,
        )

    # -- core delegation ---------------------------------------------------

    @property
    def fitted_(self):
        return self._model is not None

    def _require_fitted(self):
        if self._model is None:
            raise NotFittedError("estimator is not fitted; call fit(X, y) first")

    def _check_X(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D array")
        return X

    def _fit_dataset(self, ds: Dataset):
        self._model = _core.fit(ds, self._config())
        return self

    def save(self, path):
        """Persist the fitted model in the core's versioned file format."""
        self._require_fitted()
        _model_io.save(self._model, path)

    def _adopt(self, model):
        self._model = model
        return self


class LCEClassifier(_BaseEstimator):
    """Local Cascade Ensemble classifier with a fit/predict/predict_proba
    surface; n_jobs=-1 uses all cores and random_state fixes every stochastic
    choice."""

    _task = CLASSIFICATION

    def fit(self, X, y):
        X = self._check_X(X)
        y = np.asarray(y)
        if y.ndim != 1 or len(y) != len(X):
            raise ValueError(f"y must be 1-D with {len(X)} entries")
        if len(X) == 0:
            raise ValueError("X is empty")
        classes = []
        index_of = {}
        labels = np.empty(len(y), dtype=np.int64)
        for i, value in enumerate(y.tolist()):
            if value not in index_of:
                index_of[value] = len(classes)
                classes.append(value)
            labels[i] = index_of[value]
        if len(classes) < 2:
            raise ValueError("need at least 2 distinct classes")
        self.classes_ = np.asarray(classes)
        ds = Dataset(
            features=X,
            labels=labels,
            feature_names=[f"x{i}" for i in range(X.shape[1])],
            task=CLASSIFICATION,
            class_names=[str(c) for c in classes],
        )
        return self._fit_dataset(ds)

    def predict_proba(self, X):
        """(n, K) class probabilities; rows sum to 1 within 1e-9."""
        self._require_fitted()
        return _core.predict_proba(self._model, self._check_X(X))

    def predict(self, X):
        """Predicted labels, as the values passed to fit."""
        self._require_fitted()
        indices = _core.predict(self._model, self._check_X(X))
        return self.classes_[indices]

    @classmethod
    def load(cls, path):
        """Rebuild a classifier around a saved core model (classes become the
        saved class names)."""
        model = _model_io.load(path)
        if model.task != CLASSIFICATION:
            raise ValueError("model file holds a regressor")
        est = cls(
            n_estimators=model.config.n_estimators,
            max_depth=model.config.cascade.max_depth,
            random_state=model.config.seed,
        )
        est.classes_ = np.asarray(model.class_names)
        return est._adopt(model)


class LCERegressor(_BaseEstimator):
    """Local Cascade Ensemble regressor; mirrors LCEClassifier minus
    predict_proba."""

    _task = REGRESSION

    def fit(self, X, y):
        X = self._check_X(X)
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 1 or len(y) != len(X):
            raise ValueError(f"y must be 1-D with {len(X)} entries")
        if len(X) == 0:
            raise ValueError("X is empty")
        ds = Dataset(
            features=X,
            labels=y,
            feature_names=[f"x{i}" for i in range(X.shape[1])],
            task=REGRESSION,
        )
        return self._fit_dataset(ds)

    def predict(self, X):
        self._require_fitted()
        return _core.predict(self._model, self._check_X(X))

    @classmethod
    def load(cls, path):
        model = _model_io.load(path)
        if model.task != REGRESSION:
            raise ValueError("model file holds a classifier")
        est = cls(
            n_estimators=model.config.n_estimators,
            max_depth=model.config.cascade.max_depth,
            random_state=model.config.seed,
        )
        return est._adopt(model)
