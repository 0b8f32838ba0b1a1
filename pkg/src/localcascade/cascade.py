"""Cascade trees: a decision tree whose every node hosts a tuned boosting model.

At each node a base learner is fitted to the node's data and its per-row
outputs (class probabilities, or the predicted value for regression) are
appended as new feature columns. The augmented matrix is what gets split, so
children inherit every ancestor's appended columns: a node at depth d sees
input_width + d * augment_width features. Leaves predict with their own base
learner.

With use_base_learner=False the same machinery degrades to a plain impurity
tree (no augmentation, histogram/mean leaves), which serves as the bagged-tree
baseline in benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gbt import GBTConfig, GBTModel, fit_gbt, predict_matrix
from .seeds import SeedStream
from .tuning import tune_base_learner

CLASSIFICATION = "classification"
REGRESSION = "regression"


@dataclass(frozen=True)
class CascadeConfig:
    """Outer-tree hyperparameters; max_depth is the depth of the cascade tree,
    not of the base learner's internal trees."""

    max_depth: int = 2
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    tuning_budget: int = 3
    task: str = CLASSIFICATION
    use_base_learner: bool = True
    fixed_base_config: GBTConfig | None = None  # bypasses per-node tuning

    def validate(self):
        if self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if self.min_samples_split < 2 * self.min_samples_leaf:
            raise ValueError("min_samples_split must be >= 2 * min_samples_leaf")
        if self.tuning_budget < 1:
            raise ValueError("tuning_budget must be >= 1")
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise ValueError(f"unknown task {self.task!r}")


@dataclass
class Split:
    feature: int  # index into the node's augmented columns
    threshold: float
    missing_left: bool


@dataclass
class CascadeNode:
    base: GBTModel | None
    split: Split | None = None
    left: "CascadeNode | None" = None
    right: "CascadeNode | None" = None
    leaf_value: np.ndarray | float | None = None  # plain-tree leaves only

    @property
    def is_leaf(self) -> bool:
        return self.split is None


@dataclass
class CascadeTree:
    root: CascadeNode
    input_width: int
    n_classes: int  # 0 for regression
    task: str

    @property
    def augment_width(self) -> int:
        return self.n_classes if self.task == CLASSIFICATION else 1


def augment(X, base: GBTModel, n_classes: int, task: str) -> np.ndarray:
    """Append the base learner's outputs as new columns: K probability columns
    in global class-index order, or one predicted-value column."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != base.feature_width:
        raise ValueError(
            f"matrix width {X.shape[1]} != base feature width {base.feature_width}"
        )
    out = predict_matrix(base, X)
    if task == REGRESSION:
        out = out.reshape(-1, 1)
    return np.hstack([X, out])


# --- impurity split search -------------------------------------------------
#
# Candidate splits are scored with a single canonical float expression shared
# with the brute-force test oracle, evaluated from exact per-side statistics
# (integer class counts, or target sums), so equal partitions score equal
# bitwise and ties resolve identically everywhere.


def gini_decrease(parent_sq, n, left_sq, n_left, right_sq, n_right):
    """Weighted Gini impurity decrease from class-count sums of squares."""
    with np.errstate(divide="ignore", invalid="ignore"):  # masked positions only
        return (left_sq / n_left + right_sq / n_right) / n - parent_sq / (n * n)


def variance_decrease(sy, sy2, n, sy_l, sy2_l, n_left, sy_r, sy2_r, n_right):
    """Weighted population-variance decrease from per-side sums and square sums."""
    with np.errstate(divide="ignore", invalid="ignore"):  # masked positions only
        parent = (sy2 - sy * sy / n) / n
        children = ((sy2_l - sy_l * sy_l / n_left) + (sy2_r - sy_r * sy_r / n_right)) / n
        return parent - children


def gini_impurity(labels, n_classes: int | None = None) -> float:
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=n_classes or 0).astype(np.float64)
    n = len(labels)
    return 1.0 - float((counts * counts).sum()) / (n * n)


def variance_impurity(targets) -> float:
    targets = np.asarray(targets, dtype=np.float64)
    n = len(targets)
    sy = float(targets.sum())
    sy2 = float((targets * targets).sum())
    return (sy2 - sy * sy / n) / n


@dataclass
class _CascadeSplit:
    feature: int
    threshold: float
    missing_left: bool
    decrease: float
    left_rows: np.ndarray
    right_rows: np.ndarray


def _best_split_full(X, y, task, n_classes, min_samples_leaf) -> _CascadeSplit | None:
    m, width = X.shape
    if m < 2:
        raise ValueError("need >= 2 rows to split")
    if width == 0:
        return None
    order = np.argsort(X, axis=0, kind="stable")  # NaNs last per column
    values = np.take_along_axis(X, order, axis=0)
    present = ~np.isnan(values)
    n_present = present.sum(axis=0)
    pos = np.arange(m - 1)[:, None]
    boundary_ok = (pos + 1 < n_present[None, :]) & (values[1:] > values[:-1])
    if not boundary_ok.any():
        return None

    cols = np.arange(width)
    last_present = np.maximum(n_present - 1, 0)
    counts_left = (pos + 1).astype(np.float64)  # present rows on the left

    if task == CLASSIFICATION:
        onehot = np.zeros((m, n_classes), dtype=np.float64)
        onehot[np.arange(m), y] = 1.0
        prefix = np.cumsum(onehot[order], axis=0)  # (m, width, K), exact ints
        total = prefix[-1, 0, :]  # identical across columns
        miss = prefix[-1] - prefix[last_present, cols]  # (width, K); 0 where no NaN
        parent_sq = float((total * total).sum())
        stats_left = prefix[:-1]  # class counts left of each boundary
    else:
        ys = y[order]
        prefix = np.cumsum(ys, axis=0)
        prefix2 = np.cumsum(ys * ys, axis=0)
        sy, sy2 = prefix[-1, 0], prefix2[-1, 0]
        miss_sy = prefix[-1] - prefix[last_present, cols]
        miss_sy2 = prefix2[-1] - prefix2[last_present, cols]

    n_miss = (m - n_present).astype(np.float64)
    best_dec = -np.inf
    best_key = None
    for missing_left in (True, False):
        if missing_left:
            n_left = counts_left + n_miss[None, :]
        else:
            n_left = counts_left
        n_right = m - n_left
        ok = boundary_ok & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
        if not ok.any():
            continue
        if task == CLASSIFICATION:
            cl = stats_left + (miss[None, :, :] if missing_left else 0.0)
            cr = total[None, None, :] - cl
            sq_l = (cl * cl).sum(axis=2)
            sq_r = (cr * cr).sum(axis=2)
            dec = gini_decrease(parent_sq, m, sq_l, n_left, sq_r, n_right)
        else:
            sl = prefix[:-1] + (miss_sy[None, :] if missing_left else 0.0)
            sl2 = prefix2[:-1] + (miss_sy2[None, :] if missing_left else 0.0)
            dec = variance_decrease(
                sy, sy2, m, sl, sl2, n_left, sy - sl, sy2 - sl2, n_right
            )
        dec = np.where(ok, dec, -np.inf)
        top = dec.max()
        if top == -np.inf or top < best_dec:
            continue
        for i, j in np.argwhere(dec == top):
            key = (int(j), int(i), 0 if missing_left else 1)
            if top > best_dec or key < best_key:
                best_dec = float(top)
                best_key = key
    if best_key is None or best_dec <= 0.0:
        return None

    j, i, dir_rank = best_key
    missing_left = dir_rank == 0
    c = int(n_present[j])
    col = order[:, j]
    left_rows = col[: i + 1]
    right_rows = col[i + 1 : c]
    missing_rows = col[c:]
    if missing_rows.size:
        if missing_left:
            left_rows = np.concatenate([left_rows, missing_rows])
        else:
            right_rows = np.concatenate([right_rows, missing_rows])
    threshold = float((values[i, j] + values[i + 1, j]) / 2.0)
    return _CascadeSplit(j, threshold, missing_left, best_dec, left_rows, right_rows)


def best_split(X, y, task: str, min_samples_leaf: int = 1, n_classes: int = 0):
    """Best impurity split of (X, y), or None when no split strictly decreases
    weighted Gini / population variance while respecting min_samples_leaf.

    Missing split-feature values are assigned to whichever side scores better;
    ties prefer the lowest feature index, lowest threshold, missing-left.
    Returns (feature, threshold, missing_left, decrease)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if task == CLASSIFICATION and n_classes == 0:
        n_classes = int(y.max()) + 1
    choice = _best_split_full(X, y, task, n_classes, min_samples_leaf)
    if choice is None:
        return None
    return choice.feature, choice.threshold, choice.missing_left, choice.decrease


# --- fitting ---------------------------------------------------------------


def _is_pure(y, task):
    return bool((y == y[0]).all())


def _leaf_value(y, task, n_classes):
    if task == CLASSIFICATION:
        return np.bincount(y, minlength=n_classes).astype(np.float64) / len(y)
    return float(np.mean(y))


def _fit_node(X, y, depth, cfg: CascadeConfig, n_classes, seeds: SeedStream) -> CascadeNode:
    if len(X) == 0:
        raise ValueError("cannot fit a node on empty data")
    base = None
    if cfg.use_base_learner:
        base_cfg = cfg.fixed_base_config
        if base_cfg is None:
            base_cfg = tune_base_learner(
                X, y, cfg.tuning_budget, seeds.next(), cfg.task, n_classes
            )
        base = fit_gbt(X, y, cfg.task, n_classes, base_cfg)

    stop = (
        depth >= cfg.max_depth
        or len(X) < cfg.min_samples_split
        or _is_pure(y, cfg.task)
    )
    choice = None
    if not stop:
        X_node = augment(X, base, n_classes, cfg.task) if base is not None else X
        choice = _best_split_full(
            X_node, y, cfg.task, n_classes, cfg.min_samples_leaf
        )
    if choice is None:
        leaf_value = None if base is not None else _leaf_value(y, cfg.task, n_classes)
        return CascadeNode(base=base, leaf_value=leaf_value)

    node = CascadeNode(
        base=base,
        split=Split(choice.feature, choice.threshold, choice.missing_left),
    )
    node.left = _fit_node(
        X_node[choice.left_rows], y[choice.left_rows], depth + 1, cfg, n_classes, seeds
    )
    node.right = _fit_node(
        X_node[choice.right_rows], y[choice.right_rows], depth + 1, cfg, n_classes, seeds
    )
    return node


def fit_tree(X, y, config: CascadeConfig, n_classes: int = 0, seed: int = 0) -> CascadeTree:
    """Fit one cascade tree; per-node tuning seeds derive from `seed` in
    pre-order, so the result depends only on (data, config, seed)."""
    config.validate()
    X = np.asarray(X, dtype=np.float64)
    if config.task == CLASSIFICATION:
        y = np.asarray(y, dtype=np.int64)
        if n_classes < 2:
            raise ValueError("classification needs n_classes >= 2")
    else:
        y = np.asarray(y, dtype=np.float64)
        n_classes = 0
    root = _fit_node(X, y, 0, config, n_classes, SeedStream(seed))
    return CascadeTree(
        root=root, input_width=X.shape[1], n_classes=n_classes, task=config.task
    )


# --- prediction ------------------------------------------------------------


def _predict_into(node: CascadeNode, X, idx, out, task):
    outputs = None
    if node.base is not None:
        outputs = predict_matrix(node.base, X)
    if node.is_leaf:
        if outputs is not None:
            out[idx] = outputs
        else:
            out[idx] = node.leaf_value
        return
    if outputs is not None:
        X = np.hstack([X, outputs.reshape(len(X), -1)])
    vals = X[:, node.split.feature]
    missing = np.isnan(vals)
    go_left = np.where(missing, node.split.missing_left, vals < node.split.threshold)
    if go_left.any():
        _predict_into(node.left, X[go_left], idx[go_left], out, task)
    if not go_left.all():
        keep = ~go_left
        _predict_into(node.right, X[keep], idx[keep], out, task)


def predict_tree_matrix(tree: CascadeTree, X) -> np.ndarray:
    """Route rows root-to-leaf, augmenting with each node's base outputs on the
    way down; returns (n, K) probabilities or (n,) values."""
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X.reshape(1, -1)
    if X.shape[1] != tree.input_width:
        raise ValueError(f"row width {X.shape[1]} != tree input width {tree.input_width}")
    if tree.task == CLASSIFICATION:
        out = np.empty((len(X), tree.n_classes), dtype=np.float64)
    else:
        out = np.empty(len(X), dtype=np.float64)
    _predict_into(tree.root, X, np.arange(len(X), dtype=np.int64), out, tree.task)
    return out


def predict_tree(tree: CascadeTree, row):
    """Single-row convenience wrapper: probability vector (K,) or a float."""
    out = predict_tree_matrix(tree, np.asarray(row, dtype=np.float64).reshape(1, -1))
    return out[0] if tree.task == CLASSIFICATION else float(out[0])


def check_schema(tree: CascadeTree):
    """Assert the width bookkeeping invariant on every node; returns node count."""
    aw = tree.augment_width

    def walk(node, depth):
        width_in = tree.input_width + depth * aw
        count = 1
        if node.base is not None:
            assert node.base.feature_width == width_in, (
                node.base.feature_width,
                width_in,
            )
        if not node.is_leaf:
            width_split = width_in + (aw if node.base is not None else 0)
            assert 0 <= node.split.feature < width_split
            count += walk(node.left, depth + 1) + walk(node.right, depth + 1)
        return count

    return walk(tree.root, 0)
