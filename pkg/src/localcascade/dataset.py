"""Tabular dataset model: CSV ingestion, splitting and resampling primitives.

Feature matrices are float64 with NaN marking a missing cell; missingness is
preserved end to end (loaders never impute). All sampling helpers take an
explicit seed and keep no hidden state, so they are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CLASSIFICATION = "classification"
REGRESSION = "regression"

#: Cell texts treated as missing values (case-sensitive).
DEFAULT_MISSING_TOKENS = ("", "NA", "NaN")


class DatasetError(ValueError):
    """Raised for malformed files, bad schemas, or invalid split parameters."""


@dataclass
class Dataset:
    """Immutable row-major dataset with an explicit task and label schema.

    features: (rows, width) float64, NaN = missing cell.
    labels: int64 class indices in [0, K) for classification, float64 otherwise.
    class_names: K label names in first-appearance order (classification only).
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    task: str
    class_names: list[str] | None = None
    label_name: str = "label"

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if self.features.shape[1] != len(self.feature_names):
            raise DatasetError(
                f"feature width {self.features.shape[1]} != "
                f"{len(self.feature_names)} feature names"
            )
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise DatasetError(f"unknown task {self.task!r}")
        if self.task == CLASSIFICATION:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.class_names is None or len(self.class_names) < 2:
                raise DatasetError("classification needs >= 2 class names")
            if self.labels.size and (
                self.labels.min() < 0 or self.labels.max() >= len(self.class_names)
            ):
                raise DatasetError("class index out of range")
        else:
            self.labels = np.asarray(self.labels, dtype=np.float64)
            self.class_names = None
        if len(self.labels) != self.features.shape[0]:
            raise DatasetError("labels length != number of rows")
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def rows(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names) if self.class_names else 0

    def subset(self, indices) -> "Dataset":
        """Dataset restricted to `indices` (duplicates allowed); schema unchanged."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            feature_names=list(self.feature_names),
            task=self.task,
            class_names=list(self.class_names) if self.class_names else None,
            label_name=self.label_name,
        )


def is_missing(value: float) -> bool:
    return math.isnan(value)


def _parse_cell(text, missing_tokens, where):
    if text in missing_tokens:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DatasetError(f"non-numeric cell {text!r} at {where}") from None


def load_csv(
    path,
    label_column: str,
    task: str = CLASSIFICATION,
    missing_tokens=DEFAULT_MISSING_TOKENS,
) -> Dataset:
    """Load a comma-separated file with a header row into a Dataset.

    Cells textually equal to a missing token become missing; everything else
    must parse as a number. Classification labels are mapped to class indices
    in first-appearance order. Quoting is not supported: a row whose cell
    count disagrees with the header (e.g. from an embedded comma) is an error.
    """
    if task not in (CLASSIFICATION, REGRESSION):
        raise DatasetError(f"unknown task {task!r}")
    missing_tokens = set(missing_tokens)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise DatasetError(f"no such file: {path}") from None
    if not lines:
        raise DatasetError(f"{path}: empty file")

    header = lines[0].split(",")
    if label_column not in header:
        raise DatasetError(f"label column {label_column!r} not in header {header}")
    label_pos = header.index(label_column)
    feature_names = [h for i, h in enumerate(header) if i != label_pos]

    rows = []
    raw_labels = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DatasetError(
                f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
            )
        raw_labels.append(cells[label_pos])
        del cells[label_pos]
        rows.append(
            [
                _parse_cell(c, missing_tokens, f"{path}:{lineno} column {name!r}")
                for c, name in zip(cells, feature_names)
            ]
        )
    if not rows:
        raise DatasetError(f"{path}: no data rows")

    features = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
    if task == CLASSIFICATION:
        class_names: list[str] = []
        index_of: dict[str, int] = {}
        labels = np.empty(len(raw_labels), dtype=np.int64)
        for i, text in enumerate(raw_labels):
            if text in missing_tokens:
                raise DatasetError(f"{path}: missing label in data row {i + 1}")
            if text not in index_of:
                index_of[text] = len(class_names)
                class_names.append(text)
            labels[i] = index_of[text]
        if len(class_names) < 2:
            raise DatasetError(
                f"{path}: classification needs >= 2 distinct labels, got {len(class_names)}"
            )
    else:
        class_names = None
        labels = np.empty(len(raw_labels), dtype=np.float64)
        for i, text in enumerate(raw_labels):
            if text in missing_tokens:
                raise DatasetError(f"{path}: missing label in data row {i + 1}")
            try:
                labels[i] = float(text)
            except ValueError:
                raise DatasetError(
                    f"{path}: non-numeric label {text!r} in data row {i + 1}"
                ) from None

    return Dataset(
        features=features,
        labels=labels,
        feature_names=feature_names,
        task=task,
        class_names=class_names,
        label_name=label_column,
    )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _allocate_test_counts(class_counts, fraction):
    """Largest-remainder allocation: per-class test counts in {floor, ceil} of
    the proportional share, summing to round(total * fraction)."""
    quotas = [c * fraction for c in class_counts]
    counts = [int(math.floor(q)) for q in quotas]
    total = _round_half_up(sum(class_counts) * fraction)
    extras = total - sum(counts)
    order = sorted(
        range(len(quotas)), key=lambda i: (-(quotas[i] - math.floor(quotas[i])), i)
    )
    for i in order[:extras]:
        counts[i] += 1
    return counts


def split_indices(labels, test_fraction, seed, stratified):
    """Deterministic (train_indices, test_indices) partition of range(len(labels)).

    Stratified mode allocates per-class test counts by largest remainder, so
    each class contributes floor or ceil of its proportional share.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test fraction must be in (0, 1), got {test_fraction}")
    n = len(labels)
    rng = np.random.default_rng(seed)
    if stratified:
        labels = np.asarray(labels)
        classes = np.unique(labels)
        counts = [int((labels == c).sum()) for c in classes]
        test_counts = _allocate_test_counts(counts, test_fraction)
        test_parts = []
        for c, k in zip(classes, test_counts):
            idx = np.flatnonzero(labels == c)
            test_parts.append(rng.choice(idx, size=k, replace=False))
        test_idx = np.sort(np.concatenate(test_parts)).astype(np.int64)
    else:
        k = _round_half_up(n * test_fraction)
        test_idx = np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
    if len(test_idx) == 0:
        raise DatasetError("split produced an empty test set")
    if len(test_idx) == n:
        raise DatasetError("split produced an empty training set")
    mask = np.ones(n, dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask).astype(np.int64), test_idx


def train_test_split(
    ds: Dataset, test_fraction: float, seed: int, stratified: bool = False
) -> tuple[Dataset, Dataset]:
    """Disjoint (train, test) partition; deterministic for a fixed seed."""
    if stratified and ds.task != CLASSIFICATION:
        raise DatasetError("stratified split requires a classification dataset")
    train_idx, test_idx = split_indices(ds.labels, test_fraction, seed, stratified)
    return ds.subset(train_idx), ds.subset(test_idx)


def bootstrap_sample(ds: Dataset, seed: int) -> tuple[Dataset, np.ndarray]:
    """`rows` indices drawn uniformly with replacement, plus the resampled rows."""
    if ds.rows < 1:
        raise DatasetError("cannot bootstrap an empty dataset")
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, ds.rows, size=ds.rows, dtype=np.int64)
    return ds.subset(indices), indices


def kfold_indices(labels, k: int, seed: int, stratified: bool = False):
    """k disjoint folds covering range(len(labels)), sizes differing by at most 1.

    Stratified mode deals each class's shuffled rows into consecutive folds of
    one continuous round-robin, spreading small classes as evenly as possible.
    """
    n = len(labels)
    if k < 2 or k > n:
        raise DatasetError(f"k must be in [2, {n}], got {k}")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    if stratified:
        labels = np.asarray(labels)
        position = 0
        for c in np.unique(labels):
            for idx in rng.permutation(np.flatnonzero(labels == c)):
                folds[position % k].append(int(idx))
                position += 1
    else:
        for position, idx in enumerate(rng.permutation(n)):
            folds[position % k].append(int(idx))
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]
