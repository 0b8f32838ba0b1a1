"""Hyperparameter search: seeded random search for each node's base learner,
and exhaustive grid search with k-fold cross-validation for the ensemble."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import CLASSIFICATION, Dataset, kfold_indices, split_indices
from .gbt import GBTConfig, REGRESSION as GBT_REGRESSION, fit_gbt, predict_matrix


@dataclass
class SearchSpace:
    """Named candidate-value lists; insertion order defines the row-major
    order of the full grid."""

    values: dict[str, list] = field(default_factory=dict)

    def validate(self):
        if not self.values:
            raise ValueError("empty search space")
        for name, options in self.values.items():
            if not options:
                raise ValueError(f"search space field {name!r} has no candidates")

    def first_point(self) -> dict:
        return {name: options[0] for name, options in self.values.items()}

    def sample(self, rng) -> dict:
        return {
            name: options[int(rng.integers(len(options)))]
            for name, options in self.values.items()
        }

    def points(self):
        names = list(self.values)
        for combo in itertools.product(*(self.values[n] for n in names)):
            yield dict(zip(names, combo))

    def size(self) -> int:
        out = 1
        for options in self.values.values():
            out *= len(options)
        return out


def default_base_space() -> SearchSpace:
    return SearchSpace(
        {
            "n_rounds": [10, 30, 50],
            "max_depth": [1, 2, 3],
            "learning_rate": [0.1, 0.3],
        }
    )


@dataclass
class TuneResult:
    best: dict
    candidates: list  # (params, mean score, per-fold scores), in grid order


_SMALL_NODE_ROWS = 10
_HOLDOUT_FRACTION = 0.2


def _score(pred, y, task):
    if task == CLASSIFICATION:
        return float(np.mean(pred == y))
    err = np.asarray(pred, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return -float(np.mean(err * err))


def _gbt_labels(model, X):
    out = predict_matrix(model, X)
    if model.task == GBT_REGRESSION:
        return out
    return np.argmax(out, axis=1)


def tune_base_learner(
    X,
    y,
    budget: int,
    seed: int,
    task: str,
    n_classes: int = 0,
    space: SearchSpace | None = None,
) -> GBTConfig:
    """Pick a base-learner config by seeded uniform random search.

    `budget` configs are drawn from `space` (default_base_space() if None) and
    scored on a seeded 80/20 holdout of the node data by accuracy or negative
    MSE; ties keep the earliest draw. Nodes with fewer than 10 rows skip the
    holdout and get the space's first config, as does a budget of 1 (a single
    draw needs no scoring)."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        raise ValueError("cannot tune on empty data")
    space = space or default_base_space()
    space.validate()
    if len(X) < _SMALL_NODE_ROWS:
        return GBTConfig(**space.first_point())
    rng = np.random.default_rng(seed)
    drawn = [GBTConfig(**space.sample(rng)) for _ in range(budget)]
    if budget == 1:
        return drawn[0]

    train_idx, test_idx = split_indices(
        y, _HOLDOUT_FRACTION, seed, stratified=task == CLASSIFICATION
    )
    best_cfg = None
    best_score = -np.inf
    for cfg in drawn:
        model = fit_gbt(X[train_idx], np.asarray(y)[train_idx], task, n_classes, cfg)
        score = _score(_gbt_labels(model, X[test_idx]), np.asarray(y)[test_idx], task)
        if score > best_score:
            best_score = score
            best_cfg = cfg
    return best_cfg


def _eval_grid_point(args):
    """Fit one (candidate, fold) cell; top-level so process pools can pickle it."""
    ds, params, train_idx, test_idx, mode, seed = args
    from . import ensemble  # deferred: ensemble depends on this module

    train = ds.subset(train_idx)
    test = ds.subset(test_idx)
    if mode == "gbt":
        cfg = GBTConfig(
            n_rounds=params.get("n_estimators", 30),
            max_depth=params.get("max_depth", 3),
        )
        model = fit_gbt(train.features, train.labels, ds.task, ds.n_classes, cfg)
        pred = _gbt_labels(model, test.features)
    else:
        config = ensemble.config_for_mode(mode, params, ds.task, seed)
        model = ensemble.fit(train, config)
        pred = ensemble.predict(model, test.features)
    return _score(pred, test.labels, ds.task)


def grid_search_cv(
    ds: Dataset,
    space: SearchSpace,
    k: int,
    seed: int,
    mode: str = "lce",
    parallelism: int | None = 1,
) -> TuneResult:
    """Exhaustively score every grid point by k-fold cross-validation.

    Every point is fitted on k-1 folds and scored on the held-out fold
    (accuracy, or negative MSE for regression); the best mean wins, ties going
    to the first point in row-major grid order. `mode` selects what the grid
    parameterizes: the full ensemble ("lce"), its no-augmentation bagged-tree
    variant ("bagged_trees"), or a single boosted model ("gbt", where
    n_estimators plays the number of rounds)."""
    space.validate()
    points = list(space.points())
    folds = kfold_indices(ds.labels, k, seed, stratified=ds.task == CLASSIFICATION)
    all_idx = np.arange(ds.rows)
    jobs = []
    for params in points:
        for fold in folds:
            mask = np.ones(ds.rows, dtype=bool)
            mask[fold] = False
            jobs.append((ds, params, all_idx[mask], fold, mode, seed))

    from .ensemble import resolve_parallelism

    workers = min(resolve_parallelism(parallelism), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(_eval_grid_point, jobs, chunksize=1))
    else:
        scores = [_eval_grid_point(job) for job in jobs]

    candidates = []
    best = None
    best_mean = -np.inf
    for i, params in enumerate(points):
        fold_scores = scores[i * k : (i + 1) * k]
        mean = float(np.mean(fold_scores))
        candidates.append((params, mean, fold_scores))
        if mean > best_mean:
            best_mean = mean
            best = params
    return TuneResult(best=best, candidates=candidates)
