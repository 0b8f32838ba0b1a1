"""Accuracy metrics, rank statistics, the benchmark protocol, and reporting.

The benchmark protocol per dataset: a seed-fixed stratified 75/25 split, grid
search with 3-fold CV on the training split for each requested method, a
refit of the winning point on the full training split, and test accuracy
reported to one decimal. Rank rows use the min-rank rule: tied methods share
the rank of the best tied position.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import ensemble
from .dataset import CLASSIFICATION, Dataset, load_csv, train_test_split
from .gbt import GBTConfig, fit_gbt, predict_matrix
from .tuning import SearchSpace, grid_search_cv

MODES = ("lce", "bagged_trees", "gbt")


def _round1(x: float) -> float:
    """Round to one decimal, halves away from zero."""
    return math.floor(x * 10.0 + 0.5) / 10.0 if x >= 0 else -math.floor(-x * 10.0 + 0.5) / 10.0


def accuracy(y_true, y_pred) -> float:
    """Percentage of matches, rounded to one decimal (e.g. 37/38 -> 97.4)."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} != {len(y_pred)}")
    if len(y_true) == 0:
        raise ValueError("empty label vectors")
    return _round1(100.0 * float(np.mean(y_true == y_pred)))


def mean_squared_error(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} != {len(y_pred)}")
    if len(y_true) == 0:
        raise ValueError("empty label vectors")
    return float(np.mean((y_true - y_pred) ** 2))


def _check_table(rows):
    if not rows:
        raise ValueError("accuracy table has no datasets")
    width = len(rows[0])
    if width < 2:
        raise ValueError("accuracy table needs >= 2 methods")
    if any(len(r) != width for r in rows):
        raise ValueError("ragged accuracy table")
    return width


def min_rank_table(rows) -> list[float]:
    """Per-method average rank; a method's rank on a dataset is 1 plus the
    number of strictly better methods, so ties share the minimum rank."""
    width = _check_table(rows)
    totals = [0.0] * width
    for row in rows:
        for m in range(width):
            totals[m] += 1 + sum(1 for a in row if a > row[m])
    return [t / len(rows) for t in totals]


def wins_ties(rows) -> list[int]:
    """Per-method count of datasets where it attains the maximum accuracy."""
    width = _check_table(rows)
    counts = [0] * width
    for row in rows:
        top = max(row)
        for m in range(width):
            if row[m] == top:
                counts[m] += 1
    return counts


@dataclass
class BenchRow:
    name: str
    samples: int
    dimensions: int
    classes: int
    accuracies: list[float]  # one per method, percentage
    chosen: list[dict]  # winning grid point per method


@dataclass
class BenchReport:
    methods: list[str]
    rows: list[BenchRow]

    @property
    def accuracy_block(self) -> list[list[float]]:
        return [r.accuracies for r in self.rows]

    @property
    def average_ranks(self) -> list[float]:
        return min_rank_table(self.accuracy_block)

    @property
    def wins(self) -> list[int]:
        return wins_ties(self.accuracy_block)


_DEFAULT_GRID = {"n_estimators": [5, 10, 20], "max_depth": [1, 2, 3]}


def load_manifest(path) -> dict:
    """Benchmark manifest: JSON with datasets [{name, path, label, task}] and
    optional seed / k / test_fraction / grid; csv paths resolve relative to
    the manifest file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"no such manifest: {path}") from None
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: manifest is not valid JSON ({e})") from None
    if "datasets" not in manifest or not manifest["datasets"]:
        raise ValueError(f"{path}: manifest lists no datasets")
    root = os.path.dirname(os.path.abspath(path))
    for entry in manifest["datasets"]:
        for key in ("name", "path", "label"):
            if key not in entry:
                raise ValueError(f"{path}: dataset entry missing {key!r}")
        entry["path"] = os.path.join(root, entry["path"])
    return manifest


def fit_with_grid_search(ds, mode, grid, k, seed, parallelism=None):
    """Grid-search `mode` on ds with k-fold CV, refit the winner on all of ds.

    Returns (model, winning params). The gbt mode fits a single boosted model
    whose n_rounds comes from the grid's n_estimators."""
    space = SearchSpace({name: list(options) for name, options in grid.items()})
    result = grid_search_cv(ds, space, k, seed, mode=mode, parallelism=parallelism)
    params = result.best
    if mode == "gbt":
        cfg = GBTConfig(
            n_rounds=params.get("n_estimators", 30),
            max_depth=params.get("max_depth", 3),
        )
        model = fit_gbt(ds.features, ds.labels, ds.task, ds.n_classes, cfg)
    else:
        config = ensemble.config_for_mode(mode, params, ds.task, seed)
        config = ensemble.LCEConfig(
            n_estimators=config.n_estimators,
            cascade=config.cascade,
            seed=seed,
            parallelism=parallelism,
        )
        model = ensemble.fit(ds, config)
    return model, params


def _model_labels(model, X):
    if isinstance(model, ensemble.LCEModel):
        return ensemble.predict(model, X)
    return np.argmax(predict_matrix(model, X), axis=1)


def run_benchmark(manifest: dict, modes=MODES, parallelism: int | None = None) -> BenchReport:
    """Run the benchmark protocol for every manifest dataset and mode."""
    modes = list(modes)
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown benchmark mode {mode!r}")
    seed = manifest.get("seed", 0)
    k = manifest.get("k", 3)
    test_fraction = manifest.get("test_fraction", 0.25)
    grid = manifest.get("grid", _DEFAULT_GRID)
    rows = []
    for entry in manifest["datasets"]:
        task = entry.get("task", CLASSIFICATION)
        if task != CLASSIFICATION:
            raise ValueError("benchmark supports classification datasets only")
        ds = load_csv(entry["path"], entry["label"], task)
        train, test = train_test_split(ds, test_fraction, seed, stratified=True)
        accuracies = []
        chosen = []
        for mode in modes:
            model, params = fit_with_grid_search(train, mode, grid, k, seed, parallelism)
            accuracies.append(accuracy(test.labels, _model_labels(model, test.features)))
            chosen.append(params)
        rows.append(
            BenchRow(
                name=entry["name"],
                samples=ds.rows,
                dimensions=ds.width,
                classes=ds.n_classes,
                accuracies=accuracies,
                chosen=chosen,
            )
        )
    return BenchReport(methods=modes, rows=rows)


# --- rendering ---------------------------------------------------------------


def format_report(report: BenchReport) -> str:
    headers = ["Dataset", "Samples", "Dimensions", "Classes"] + list(report.methods)
    lines = [headers]
    for row in report.rows:
        lines.append(
            [row.name, str(row.samples), str(row.dimensions), str(row.classes)]
            + [f"{a:.1f}" for a in row.accuracies]
        )
    lines.append(
        ["Average Rank", "-", "-", "-"] + [f"{r:.1f}" for r in report.average_ranks]
    )
    lines.append(["Wins/Ties", "-", "-", "-"] + [str(w) for w in report.wins])
    widths = [max(len(line[i]) for line in lines) for i in range(len(headers))]
    out = []
    for line in lines:
        out.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(line)
            )
        )
    return "\n".join(out)


def report_to_csv(report: BenchReport) -> str:
    lines = ["dataset,samples,dimensions,classes," + ",".join(report.methods)]
    for row in report.rows:
        cells = [row.name, str(row.samples), str(row.dimensions), str(row.classes)]
        cells += [f"{a:.1f}" for a in row.accuracies]
        lines.append(",".join(cells))
    lines.append("average_rank,,,," + ",".join(f"{r:.1f}" for r in report.average_ranks))
    lines.append("wins_ties,,,," + ",".join(str(w) for w in report.wins))
    return "\n".join(lines) + "\n"


def table_report_from_csv(path) -> BenchReport:
    """Rank statistics for a precomputed accuracy table: CSV with a header of
    `dataset,<method>,...` and one accuracy row per dataset (no training)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln]
    except FileNotFoundError:
        raise ValueError(f"no such table: {path}") from None
    if len(lines) < 2:
        raise ValueError(f"{path}: accuracy table needs a header and >= 1 row")
    header = lines[0].split(",")
    methods = header[1:]
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: ragged row {ln!r}")
        try:
            accs = [float(c) for c in cells[1:]]
        except ValueError:
            raise ValueError(f"{path}: non-numeric accuracy in row {ln!r}") from None
        rows.append(
            BenchRow(
                name=cells[0],
                samples=0,
                dimensions=0,
                classes=0,
                accuracies=accs,
                chosen=[{} for _ in methods],
            )
        )
    return BenchReport(methods=methods, rows=rows)


def export_csv(ds: Dataset, path) -> None:
    """Write a Dataset back to CSV (features in order, label last); missing
    cells become empty strings and reals use shortest round-trip decimals, so
    a reload reproduces every cell exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(list(ds.feature_names) + [ds.label_name]) + "\n")
        for i in range(ds.rows):
            cells = ["" if math.isnan(v) else repr(float(v)) for v in ds.features[i]]
            if ds.task == CLASSIFICATION:
                cells.append(ds.class_names[int(ds.labels[i])])
            else:
                cells.append(repr(float(ds.labels[i])))
            fh.write(",".join(cells) + "\n")
