"""Newton-boosted regression trees: the base learner fitted at every cascade node.

Each round fits one regression tree (binary/regression) or one tree per class
(multiclass) to the first/second derivatives of the loss at the current
margins. Splits maximize the regularized second-order gain; rows with a
missing split value follow a per-split default direction chosen by gain.
Fitting is deterministic: no row or column subsampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BINARY = "binary"
MULTICLASS = "multiclass"
REGRESSION = "regression"

_NEG_INF = -np.inf


@dataclass(frozen=True)
class GBTConfig:
    """Boosting hyperparameters. base_score None means 0 for classification
    and the target mean for regression."""

    n_rounds: int = 30
    max_depth: int = 3
    learning_rate: float = 0.3
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1e-3
    base_score: float | None = None

    def validate(self):
        if self.n_rounds < 1:
            raise ValueError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.reg_lambda < 0 or self.gamma < 0 or self.min_child_weight < 0:
            raise ValueError("reg_lambda, gamma and min_child_weight must be >= 0")


@dataclass
class RegTree:
    """Flat node arrays; node 0 is the root, feature == -1 marks a leaf.

    Leaf weights are stored post-shrinkage (already scaled by the learning
    rate)."""

    feature: np.ndarray
    threshold: np.ndarray
    missing_left: np.ndarray
    left: np.ndarray
    right: np.ndarray
    weight: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass
class GBTModel:
    task: str  # binary | multiclass | regression
    n_classes: int  # 0 for regression
    feature_width: int
    base_score: float
    config: GBTConfig
    rounds: list[list[RegTree]]  # one tree per round, or n_classes trees


def _sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def _softmax(margins):
    shifted = margins - margins.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def grad_hess(margins, labels, task: str, n_classes: int = 0):
    """First and second derivatives of the loss w.r.t. each margin.

    binary: logistic loss on margin, labels in {0, 1}.
    multiclass: softmax cross-entropy on (n, K) margins, exact diagonal
    hessian p * (1 - p).
    regression: squared error, g = pred - target, h = 1.
    """
    margins = np.asarray(margins, dtype=np.float64)
    if not np.all(np.isfinite(margins)):
        raise ValueError("non-finite margin")
    if task == BINARY:
        y = np.asarray(labels, dtype=np.float64)
        p = _sigmoid(margins)
        return p - y, p * (1.0 - p)
    if task == MULTICLASS:
        m = margins.reshape(-1, n_classes)
        p = _softmax(m)
        g = p.copy()
        g[np.arange(len(m)), np.asarray(labels, dtype=np.int64).ravel()] -= 1.0
        h = p * (1.0 - p)
        return g.reshape(margins.shape), h.reshape(margins.shape)
    if task == REGRESSION:
        y = np.asarray(labels, dtype=np.float64)
        if not np.all(np.isfinite(y)):
            raise ValueError("non-finite target")
        return margins - y, np.ones_like(margins)
    raise ValueError(f"unknown task {task!r}")


def _score_term(g, h, reg_lambda):
    # Positions past a column's present range carry garbage sums; they are
    # masked to -inf by the caller, so divide warnings here are noise.
    denom = np.asarray(h, dtype=np.float64) + reg_lambda
    g = np.asarray(g, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        if reg_lambda > 0.0:  # hessians are >= 0: valid entries never divide by 0
            return g * g / denom
        safe = np.where(denom > 0.0, denom, 1.0)
        return np.where(denom > 0.0, g * g / safe, 0.0)


def split_gain(gl, hl, gr, hr, reg_lambda: float, gamma: float = 0.0):
    """Regularized gain of splitting (gl+gr, hl+hr) into (gl, hl) | (gr, hr).

    A side whose hessian mass plus reg_lambda is zero contributes no score
    (its leaf weight is pinned to 0), so the fully degenerate split scores
    -gamma. Broadcasts over array inputs."""
    gain = 0.5 * (
        _score_term(gl, hl, reg_lambda)
        + _score_term(gr, hr, reg_lambda)
        - _score_term(np.asarray(gl) + np.asarray(gr), np.asarray(hl) + np.asarray(hr), reg_lambda)
    ) - gamma
    return float(gain) if np.ndim(gain) == 0 else gain


def leaf_weight(g, h, reg_lambda: float) -> float:
    """Optimal leaf value -g/(h + reg_lambda); 0 when the denominator is 0."""
    denom = h + reg_lambda
    if denom <= 0.0:
        return 0.0
    return -g / denom


class _SortedView:
    """Per-node feature columns in sorted order (missing rows last per column).

    order: (m, width) row indices such that X[order[:, j], j] is ascending
    with NaNs at the bottom. `boundary_ok[i, j]` marks a usable split point
    between sorted positions i and i+1: a comparison with NaN is False, so the
    strict `<` test alone rules out boundaries touching missing rows."""

    def __init__(self, X, order):
        self.order = order
        self.values = np.take_along_axis(X, order, axis=0)
        self.n_present = (~np.isnan(self.values)).sum(axis=0)
        self.has_missing = bool((self.n_present < len(order)).any())
        self.boundary_ok = self.values[:-1] < self.values[1:]

    def child(self, X, member_mask):
        """Sorted view of the rows selected by member_mask (order preserved)."""
        m = member_mask[self.order]
        count = int(member_mask.sum())
        width = self.order.shape[1]
        child_order = self.order.T[m.T].reshape(width, count).T
        return _SortedView(X, np.ascontiguousarray(child_order))


@dataclass
class _SplitChoice:
    feature: int
    boundary: int  # index into the node's sorted order
    threshold: float
    missing_left: bool
    gain: float
    left_rows: np.ndarray
    right_rows: np.ndarray


def _direction_best(gl, hl, g_total, h_total, parent_term, boundary_ok, reg_lambda, gamma, mcw):
    """Max gain and its (feature, boundary) for one missing direction.

    The gain arithmetic mirrors split_gain term for term, so a candidate
    scores bitwise the same here and through the public function."""
    gr = g_total[None, :] - gl
    hr = h_total[None, :] - hl
    gain = 0.5 * (
        _score_term(gl, hl, reg_lambda)
        + _score_term(gr, hr, reg_lambda)
        - parent_term[None, :]
    ) - gamma
    gain[~(boundary_ok & (hl >= mcw) & (hr >= mcw))] = _NEG_INF
    # argmax of the transpose scans feature-major: first hit is the lowest
    # feature index, then the lowest boundary (= lowest threshold).
    flat = int(gain.T.argmax())
    i = flat % gain.shape[0]
    j = flat // gain.shape[0]
    return float(gain[i, j]), j, i


def _best_split(view: _SortedView, g, h, reg_lambda, gamma, min_child_weight):
    """Best (feature, boundary, missing-direction) by gain over a sorted view.

    Ties break to the lowest feature index, then the lowest threshold, then
    missing-goes-left. Returns None when no candidate has gain > 0 or every
    candidate violates min_child_weight."""
    m, width = view.order.shape
    if m < 2 or width == 0 or not view.boundary_ok.any():
        return None
    gs = np.cumsum(g[view.order], axis=0)
    hs = np.cumsum(h[view.order], axis=0)
    g_total = gs[-1, :]
    h_total = hs[-1, :]
    parent_term = _score_term(g_total, h_total, reg_lambda)
    gl_present = gs[:-1, :]
    hl_present = hs[:-1, :]

    best_gain, j, i = _direction_best(
        gl_present, hl_present, g_total, h_total, parent_term,
        view.boundary_ok, reg_lambda, gamma, min_child_weight,
    )
    missing_left = True
    if view.has_missing:
        # Missing-row sums per column (exactly 0.0 where a column has no NaNs);
        # with no missing rows anywhere both directions coincide and the
        # missing-left result above already wins the tie.
        cols = np.arange(width)
        last_present = np.maximum(view.n_present - 1, 0)
        g_miss = g_total - gs[last_present, cols]
        h_miss = h_total - hs[last_present, cols]
        gain_l, j_l, i_l = _direction_best(
            gl_present + g_miss[None, :], hl_present + h_miss[None, :],
            g_total, h_total, parent_term,
            view.boundary_ok, reg_lambda, gamma, min_child_weight,
        )
        # The scan above was missing-right; left takes precedence on ties
        # unless right wins at a strictly lower (feature, boundary).
        if gain_l > best_gain or (gain_l == best_gain and (j_l, i_l) <= (j, i)):
            best_gain, j, i = gain_l, j_l, i_l
        else:
            missing_left = False
    if best_gain <= 0.0 or best_gain == _NEG_INF:
        return None

    c = int(view.n_present[j])
    col = view.order[:, j]
    left_rows = col[: i + 1]
    right_rows = col[i + 1 : c]
    missing_rows = col[c:]
    if missing_rows.size:
        if missing_left:
            left_rows = np.concatenate([left_rows, missing_rows])
        else:
            right_rows = np.concatenate([right_rows, missing_rows])
    threshold = float((view.values[i, j] + view.values[i + 1, j]) / 2.0)
    return _SplitChoice(j, i, threshold, missing_left, best_gain, left_rows, right_rows)


def best_split_gh(X, g, h, reg_lambda=1.0, gamma=0.0, min_child_weight=0.0):
    """Best gain split for rows carrying per-row gradient/hessian statistics.

    Returns (feature, threshold, missing_left, gain) or None; this is the
    same scan fit_gbt uses at every tree node."""
    X = np.asarray(X, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    view = _SortedView(X, np.argsort(X, axis=0, kind="stable"))
    choice = _best_split(view, g, h, reg_lambda, gamma, min_child_weight)
    if choice is None:
        return None
    return choice.feature, choice.threshold, choice.missing_left, choice.gain


class _TreeGrower:
    def __init__(self, X, g, h, config: GBTConfig):
        self.X = X
        self.g = g
        self.h = h
        self.cfg = config
        self.feature = []
        self.threshold = []
        self.missing_left = []
        self.left = []
        self.right = []
        self.weight = []
        self.leaf_updates = []  # (rows, shrunk weight)

    def _add_node(self):
        for arr in (self.feature, self.left, self.right):
            arr.append(-1)
        self.threshold.append(0.0)
        self.missing_left.append(True)
        self.weight.append(0.0)
        return len(self.feature) - 1

    def grow(self, view: _SortedView | None, rows, depth) -> int:
        node = self._add_node()
        cfg = self.cfg
        choice = None
        if depth < cfg.max_depth and view is not None:
            choice = _best_split(
                view, self.g, self.h, cfg.reg_lambda, cfg.gamma, cfg.min_child_weight
            )
        if choice is None:
            w = cfg.learning_rate * leaf_weight(
                float(self.g[rows].sum()), float(self.h[rows].sum()), cfg.reg_lambda
            )
            self.weight[node] = w
            self.leaf_updates.append((rows, w))
            return node
        self.feature[node] = choice.feature
        self.threshold[node] = choice.threshold
        self.missing_left[node] = choice.missing_left
        children_split = depth + 1 < cfg.max_depth  # at max depth a view is never used
        left_view = right_view = None
        if children_split:
            left_mask = np.zeros(len(self.X), dtype=bool)
            left_mask[choice.left_rows] = True
            left_view = view.child(self.X, left_mask)
            right_mask = np.zeros(len(self.X), dtype=bool)
            right_mask[choice.right_rows] = True
            right_view = view.child(self.X, right_mask)
        self.left[node] = self.grow(left_view, choice.left_rows, depth + 1)
        self.right[node] = self.grow(right_view, choice.right_rows, depth + 1)
        return node

    def build(self) -> RegTree:
        return RegTree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            missing_left=np.asarray(self.missing_left, dtype=bool),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            weight=np.asarray(self.weight, dtype=np.float64),
        )


def _grow_tree(X, root_view, g, h, config) -> tuple[RegTree, list]:
    grower = _TreeGrower(X, g, h, config)
    grower.grow(root_view, np.arange(len(X), dtype=np.int64), 0)
    return grower.build(), grower.leaf_updates


def fit_gbt(
    X,
    y,
    task: str,
    n_classes: int = 0,
    config: GBTConfig = GBTConfig(),
    seed: int = 0,
) -> GBTModel:
    """Fit a boosted-tree model; `task` is "classification" or "regression".

    Classification targets are global class indices in [0, n_classes); a
    subset containing only some classes is fine, the model still emits
    n_classes outputs. `seed` is accepted for interface uniformity; fitting
    itself is deterministic.
    """
    config.validate()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("X must be a nonempty 2-D matrix")
    n = len(X)
    if task == "classification":
        if n_classes < 2:
            raise ValueError("classification needs n_classes >= 2")
        model_task = BINARY if n_classes == 2 else MULTICLASS
        y = np.asarray(y, dtype=np.int64)
        if y.min() < 0 or y.max() >= n_classes:
            raise ValueError("label out of range")
        base_score = 0.0 if config.base_score is None else float(config.base_score)
    elif task == "regression":
        model_task = REGRESSION
        n_classes = 0
        y = np.asarray(y, dtype=np.float64)
        if not np.all(np.isfinite(y)):
            raise ValueError("non-finite target")
        base_score = float(np.mean(y)) if config.base_score is None else float(config.base_score)
    else:
        raise ValueError(f"unknown task {task!r}")
    if len(y) != n:
        raise ValueError("X and y disagree on row count")

    order = np.argsort(X, axis=0, kind="stable")  # NaNs sort last per column
    root_view = _SortedView(X, order)

    rounds: list[list[RegTree]] = []
    if model_task == MULTICLASS:
        margins = np.full((n, n_classes), base_score, dtype=np.float64)
        for _ in range(config.n_rounds):
            g, h = grad_hess(margins, y, MULTICLASS, n_classes)
            group = []
            for k in range(n_classes):
                tree, updates = _grow_tree(X, root_view, g[:, k], h[:, k], config)
                group.append(tree)
                for rows, w in updates:
                    margins[rows, k] += w
            rounds.append(group)
    else:
        margins = np.full(n, base_score, dtype=np.float64)
        gh_task = BINARY if model_task == BINARY else REGRESSION
        yy = y.astype(np.float64)
        for _ in range(config.n_rounds):
            g, h = grad_hess(margins, yy, gh_task)
            tree, updates = _grow_tree(X, root_view, g, h, config)
            for rows, w in updates:
                margins[rows] += w
            rounds.append([tree])

    return GBTModel(
        task=model_task,
        n_classes=n_classes,
        feature_width=X.shape[1],
        base_score=base_score,
        config=config,
        rounds=rounds,
    )


def _route_tree(tree: RegTree, X, out):
    """Add each row's leaf weight to out; missing values follow the default."""
    stack = [(0, np.arange(len(X), dtype=np.int64))]
    while stack:
        node, idx = stack.pop()
        feat = tree.feature[node]
        if feat < 0:
            out[idx] += tree.weight[node]
            continue
        vals = X[idx, feat]
        missing = np.isnan(vals)
        go_left = np.where(missing, tree.missing_left[node], vals < tree.threshold[node])
        stack.append((tree.left[node], idx[go_left]))
        stack.append((tree.right[node], idx[~go_left]))


def predict_margins(model: GBTModel, X) -> np.ndarray:
    """Summed tree outputs: (n,) for binary/regression, (n, K) for multiclass."""
    X = _check_width(model, X)
    n = len(X)
    if model.task == MULTICLASS:
        margins = np.full((n, model.n_classes), model.base_score, dtype=np.float64)
        for group in model.rounds:
            for k, tree in enumerate(group):
                _route_tree(tree, X, margins[:, k])
    else:
        margins = np.full(n, model.base_score, dtype=np.float64)
        for (tree,) in model.rounds:
            _route_tree(tree, X, margins)
    return margins


def _check_width(model, X):
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X.reshape(1, -1)
    if X.shape[1] != model.feature_width:
        raise ValueError(
            f"row width {X.shape[1]} != model feature width {model.feature_width}"
        )
    return X


def predict_gbt(model: GBTModel, row) -> np.ndarray | float:
    """Class probabilities (K,) or regression value for one row; rows with any
    missing pattern are valid (splits fall back to their default direction)."""
    out = predict_matrix(model, np.asarray(row, dtype=np.float64).reshape(1, -1))
    return out[0] if model.task != REGRESSION else float(out[0])


def predict_matrix(model: GBTModel, X) -> np.ndarray:
    """Batch form of predict_gbt: (n, K) probabilities or (n,) values."""
    margins = predict_margins(model, X)
    if model.task == BINARY:
        p = _sigmoid(margins)
        return np.column_stack([1.0 - p, p])
    if model.task == MULTICLASS:
        return _softmax(margins)
    return margins


def total_loss(model_task: str, margins, labels) -> float:
    """Training loss summed over rows (logistic / softmax cross-entropy /
    half squared error); used to check that boosting is monotone."""
    margins = np.asarray(margins, dtype=np.float64)
    if model_task == BINARY:
        y = np.asarray(labels, dtype=np.float64)
        return float(np.sum(np.logaddexp(0.0, margins) - y * margins))
    if model_task == MULTICLASS:
        y = np.asarray(labels, dtype=np.int64)
        lse = np.log(np.sum(np.exp(margins - margins.max(axis=1, keepdims=True)), axis=1))
        lse += margins.max(axis=1)
        return float(np.sum(lse - margins[np.arange(len(y)), y]))
    return float(0.5 * np.sum((margins - np.asarray(labels, dtype=np.float64)) ** 2))
