"""Bagging over cascade trees: the user-facing classifier/regressor.

Each of the n trees is fitted on a bootstrap replicate drawn with a per-tree
seed mixed from (ensemble seed, tree index), so the model is independent of
scheduling: any degree of parallelism produces bitwise-identical trees.
Predictions average the per-tree outputs; the per-cell summands are sorted
numerically before summation, making the mean bitwise invariant under tree
reordering as well.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .cascade import CascadeConfig, CascadeTree, fit_tree, predict_tree_matrix
from .dataset import CLASSIFICATION, Dataset, bootstrap_sample
from .seeds import mix_seed


@dataclass(frozen=True)
class LCEConfig:
    """Ensemble hyperparameters. parallelism None means all cores; bootstrap
    False (every tree sees the full data) exists for equivalence tests and is
    deliberately not exposed on the CLI."""

    n_estimators: int = 10
    cascade: CascadeConfig = field(default_factory=CascadeConfig)
    seed: int = 0
    parallelism: int | None = None
    bootstrap: bool = True

    def validate(self):
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.parallelism is not None and self.parallelism < 1:
            raise ValueError("parallelism must be >= 1 or None for all cores")
        self.cascade.validate()


@dataclass
class LCEModel:
    trees: list[CascadeTree]
    task: str
    input_width: int
    feature_names: list[str]
    class_names: list[str] | None
    label_name: str
    config: LCEConfig

    @property
    def n_classes(self) -> int:
        return len(self.class_names) if self.class_names else 0


def resolve_parallelism(parallelism: int | None) -> int:
    if parallelism is None:
        return os.cpu_count() or 1
    return parallelism


def config_for_mode(mode: str, params: dict, task: str, seed: int) -> LCEConfig:
    """LCEConfig for a grid point; "bagged_trees" disables the per-node base
    learner, turning the ensemble into plain bagged impurity trees."""
    if mode not in ("lce", "bagged_trees"):
        raise ValueError(f"unknown mode {mode!r}")
    cascade = CascadeConfig(
        max_depth=params.get("max_depth", 2),
        task=task,
        use_base_learner=mode == "lce",
    )
    return LCEConfig(
        n_estimators=params.get("n_estimators", 10),
        cascade=cascade,
        seed=seed,
        parallelism=1,
    )


def _fit_one_tree(args) -> CascadeTree:
    ds, cascade_cfg, n_classes, tree_seed, bootstrap = args
    replicate = bootstrap_sample(ds, tree_seed)[0] if bootstrap else ds
    return fit_tree(
        replicate.features, replicate.labels, cascade_cfg, n_classes, seed=tree_seed
    )


def fit(ds: Dataset, config: LCEConfig) -> LCEModel:
    """Fit n_estimators cascade trees on bootstrap replicates of ds."""
    config.validate()
    if ds.rows == 0:
        raise ValueError("cannot fit on an empty dataset")
    cascade_cfg = replace(config.cascade, task=ds.task)
    jobs = [
        (ds, cascade_cfg, ds.n_classes, mix_seed(config.seed, i), config.bootstrap)
        for i in range(config.n_estimators)
    ]
    workers = min(resolve_parallelism(config.parallelism), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(_fit_one_tree, jobs, chunksize=1))
    else:
        trees = [_fit_one_tree(job) for job in jobs]
    return LCEModel(
        trees=trees,
        task=ds.task,
        input_width=ds.width,
        feature_names=list(ds.feature_names),
        class_names=list(ds.class_names) if ds.class_names else None,
        label_name=ds.label_name,
        config=config,
    )


def _check_rows(model, X):
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X.reshape(1, -1)
    if X.shape[1] != model.input_width:
        raise ValueError(
            f"row width {X.shape[1]} != model input width {model.input_width}"
        )
    return X, single


def _tree_mean(model, X) -> np.ndarray:
    per_tree = np.stack([predict_tree_matrix(t, X) for t in model.trees])
    # Sort the summands per output cell: the mean is then bitwise identical
    # under any permutation of the trees.
    per_tree.sort(axis=0)
    return per_tree.sum(axis=0) / len(model.trees)


def predict_proba(model: LCEModel, X) -> np.ndarray:
    """Mean of the per-tree probability vectors; rows sum to 1 within 1e-9."""
    if model.task != CLASSIFICATION:
        raise ValueError("predict_proba requires a classification model")
    X, single = _check_rows(model, X)
    probs = _tree_mean(model, X)
    return probs[0] if single else probs


def predict(model: LCEModel, X):
    """Class index (argmax of predict_proba, ties to the lowest index) or the
    mean of the per-tree regression outputs."""
    X, single = _check_rows(model, X)
    if model.task == CLASSIFICATION:
        out = np.argmax(_tree_mean(model, X), axis=1)
        return int(out[0]) if single else out
    out = _tree_mean(model, X)
    return float(out[0]) if single else out
