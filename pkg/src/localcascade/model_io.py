"""Versioned model persistence.

Models are written as a single JSON document with a fixed field order and no
environment-dependent content, so saving the same model twice produces
byte-identical files. Real numbers are serialized as shortest round-trip
decimals (Python's float repr), which reconstruct the exact binary64 values:
a save/load round trip preserves predictions bitwise.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .cascade import CascadeConfig, CascadeNode, CascadeTree, Split
from .ensemble import LCEConfig, LCEModel
from .gbt import GBTConfig, GBTModel, RegTree

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Base class for model file problems."""


class UnknownVersionError(ModelFormatError):
    pass


class SchemaError(ModelFormatError):
    pass


class CorruptPayloadError(ModelFormatError):
    pass


def _gbt_config_dict(cfg: GBTConfig) -> dict:
    return {
        "n_rounds": cfg.n_rounds,
        "max_depth": cfg.max_depth,
        "learning_rate": cfg.learning_rate,
        "reg_lambda": cfg.reg_lambda,
        "gamma": cfg.gamma,
        "min_child_weight": cfg.min_child_weight,
        "base_score": cfg.base_score,
    }


def _reg_tree_dict(tree: RegTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "missing_left": tree.missing_left.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "weight": tree.weight.tolist(),
    }


def _gbt_dict(model: GBTModel) -> dict:
    return {
        "task": model.task,
        "n_classes": model.n_classes,
        "feature_width": model.feature_width,
        "base_score": model.base_score,
        "config": _gbt_config_dict(model.config),
        "rounds": [[_reg_tree_dict(t) for t in group] for group in model.rounds],
    }


def _node_dict(node: CascadeNode) -> dict:
    out = {
        "base": _gbt_dict(node.base) if node.base is not None else None,
        "split": None,
        "leaf_value": None,
        "left": None,
        "right": None,
    }
    if node.leaf_value is not None:
        lv = node.leaf_value
        out["leaf_value"] = lv.tolist() if isinstance(lv, np.ndarray) else lv
    if node.split is not None:
        out["split"] = {
            "feature": node.split.feature,
            "threshold": node.split.threshold,
            "missing_left": node.split.missing_left,
        }
        out["left"] = _node_dict(node.left)
        out["right"] = _node_dict(node.right)
    return out


def _config_dict(cfg: LCEConfig) -> dict:
    c = cfg.cascade
    return {
        "n_estimators": cfg.n_estimators,
        "seed": cfg.seed,
        "parallelism": cfg.parallelism,
        "bootstrap": cfg.bootstrap,
        "cascade": {
            "max_depth": c.max_depth,
            "min_samples_split": c.min_samples_split,
            "min_samples_leaf": c.min_samples_leaf,
            "tuning_budget": c.tuning_budget,
            "task": c.task,
            "use_base_learner": c.use_base_learner,
            "fixed_base_config": (
                _gbt_config_dict(c.fixed_base_config) if c.fixed_base_config else None
            ),
        },
    }


def model_to_dict(model: LCEModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "task": model.task,
        "label_name": model.label_name,
        "feature_names": list(model.feature_names),
        "class_names": list(model.class_names) if model.class_names else None,
        "config": _config_dict(model.config),
        "trees": [
            {
                "input_width": t.input_width,
                "n_classes": t.n_classes,
                "task": t.task,
                "root": _node_dict(t.root),
            }
            for t in model.trees
        ],
    }


def save(model: LCEModel, path) -> None:
    """Write the model as canonical JSON (fixed key order, exact reals)."""
    text = json.dumps(model_to_dict(model), allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")


# --- loading ---------------------------------------------------------------


def _get(obj, key, kinds, where, allow_none=False):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = obj[key]
    if value is None and allow_none:
        return None
    if kinds is not None and not isinstance(value, kinds):
        raise SchemaError(f"{where}.{key}: unexpected type {type(value).__name__}")
    return value


def _float_array(values, where):
    if not isinstance(values, list):
        raise SchemaError(f"{where}: expected a list")
    arr = np.empty(len(values), dtype=np.float64)
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"{where}[{i}]: expected a number")
        if not math.isfinite(v):
            raise CorruptPayloadError(f"{where}[{i}]: non-finite value")
        arr[i] = v
    return arr


def _int_array(values, where):
    if not isinstance(values, list) or any(
        isinstance(v, bool) or not isinstance(v, int) for v in values
    ):
        raise SchemaError(f"{where}: expected a list of integers")
    return np.asarray(values, dtype=np.int32)


def _load_gbt_config(obj, where) -> GBTConfig:
    base_score = _get(obj, "base_score", (int, float), where, allow_none=True)
    return GBTConfig(
        n_rounds=_get(obj, "n_rounds", int, where),
        max_depth=_get(obj, "max_depth", int, where),
        learning_rate=_get(obj, "learning_rate", (int, float), where),
        reg_lambda=_get(obj, "reg_lambda", (int, float), where),
        gamma=_get(obj, "gamma", (int, float), where),
        min_child_weight=_get(obj, "min_child_weight", (int, float), where),
        base_score=base_score,
    )


def _load_reg_tree(obj, where) -> RegTree:
    tree = RegTree(
        feature=_int_array(_get(obj, "feature", list, where), f"{where}.feature"),
        threshold=_float_array(_get(obj, "threshold", list, where), f"{where}.threshold"),
        missing_left=np.asarray(_get(obj, "missing_left", list, where), dtype=bool),
        left=_int_array(_get(obj, "left", list, where), f"{where}.left"),
        right=_int_array(_get(obj, "right", list, where), f"{where}.right"),
        weight=_float_array(_get(obj, "weight", list, where), f"{where}.weight"),
    )
    n = tree.n_nodes
    if n == 0:
        raise SchemaError(f"{where}: empty tree")
    lengths = {len(tree.threshold), len(tree.missing_left), len(tree.left), len(tree.right), len(tree.weight)}
    if lengths != {n}:
        raise SchemaError(f"{where}: node arrays disagree on length")
    for name in ("left", "right"):
        child = getattr(tree, name)
        if ((tree.feature >= 0) & ((child < 0) | (child >= n))).any():
            raise SchemaError(f"{where}.{name}: child index out of range")
    return tree


def _load_gbt(obj, where) -> GBTModel:
    task = _get(obj, "task", str, where)
    if task not in ("binary", "multiclass", "regression"):
        raise SchemaError(f"{where}.task: unknown task {task!r}")
    n_classes = _get(obj, "n_classes", int, where)
    base_score = _get(obj, "base_score", (int, float), where)
    if not math.isfinite(base_score):
        raise CorruptPayloadError(f"{where}.base_score: non-finite value")
    config = _load_gbt_config(_get(obj, "config", dict, where), f"{where}.config")
    rounds = []
    groups = _get(obj, "rounds", list, where)
    if len(groups) != config.n_rounds:
        raise SchemaError(f"{where}.rounds: expected {config.n_rounds} rounds")
    expected = n_classes if task == "multiclass" else 1
    for r, group in enumerate(groups):
        if not isinstance(group, list) or len(group) != expected:
            raise SchemaError(f"{where}.rounds[{r}]: expected {expected} trees")
        rounds.append(
            [_load_reg_tree(t, f"{where}.rounds[{r}][{k}]") for k, t in enumerate(group)]
        )
    return GBTModel(
        task=task,
        n_classes=n_classes,
        feature_width=_get(obj, "feature_width", int, where),
        base_score=float(base_score),
        config=config,
        rounds=rounds,
    )


def _load_node(obj, where) -> CascadeNode:
    base_obj = _get(obj, "base", dict, where, allow_none=True)
    base = _load_gbt(base_obj, f"{where}.base") if base_obj is not None else None
    leaf_value = _get(obj, "leaf_value", (list, int, float), where, allow_none=True)
    if isinstance(leaf_value, list):
        leaf_value = _float_array(leaf_value, f"{where}.leaf_value")
    node = CascadeNode(base=base, leaf_value=leaf_value)
    split_obj = _get(obj, "split", dict, where, allow_none=True)
    if split_obj is not None:
        threshold = _get(split_obj, "threshold", (int, float), f"{where}.split")
        if not math.isfinite(threshold):
            raise CorruptPayloadError(f"{where}.split.threshold: non-finite value")
        node.split = Split(
            feature=_get(split_obj, "feature", int, f"{where}.split"),
            threshold=float(threshold),
            missing_left=_get(split_obj, "missing_left", bool, f"{where}.split"),
        )
        node.left = _load_node(_get(obj, "left", dict, where), f"{where}.left")
        node.right = _load_node(_get(obj, "right", dict, where), f"{where}.right")
    return node


def _load_config(obj, where) -> LCEConfig:
    c = _get(obj, "cascade", dict, where)
    cw = f"{where}.cascade"
    fixed = _get(c, "fixed_base_config", dict, cw, allow_none=True)
    cascade = CascadeConfig(
        max_depth=_get(c, "max_depth", int, cw),
        min_samples_split=_get(c, "min_samples_split", int, cw),
        min_samples_leaf=_get(c, "min_samples_leaf", int, cw),
        tuning_budget=_get(c, "tuning_budget", int, cw),
        task=_get(c, "task", str, cw),
        use_base_learner=_get(c, "use_base_learner", bool, cw),
        fixed_base_config=_load_gbt_config(fixed, f"{cw}.fixed_base_config") if fixed else None,
    )
    return LCEConfig(
        n_estimators=_get(obj, "n_estimators", int, where),
        cascade=cascade,
        seed=_get(obj, "seed", int, where),
        parallelism=_get(obj, "parallelism", int, where, allow_none=True),
        bootstrap=_get(obj, "bootstrap", bool, where),
    )


def load(path) -> LCEModel:
    """Reconstruct a saved model, validating version, schema, and numerics."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorruptPayloadError(f"{path}: not valid JSON ({e})") from None
    version = _get(doc, "format_version", int, "model")
    if version != FORMAT_VERSION:
        raise UnknownVersionError(f"unknown model format version {version}")
    task = _get(doc, "task", str, "model")
    if task not in ("classification", "regression"):
        raise SchemaError(f"model.task: unknown task {task!r}")
    class_names = _get(doc, "class_names", list, "model", allow_none=True)
    trees = []
    tree_objs = _get(doc, "trees", list, "model")
    if not tree_objs:
        raise SchemaError("model.trees: no trees")
    for i, t in enumerate(tree_objs):
        where = f"model.trees[{i}]"
        trees.append(
            CascadeTree(
                root=_load_node(_get(t, "root", dict, where), f"{where}.root"),
                input_width=_get(t, "input_width", int, where),
                n_classes=_get(t, "n_classes", int, where),
                task=_get(t, "task", str, where),
            )
        )
    widths = {t.input_width for t in trees}
    if len(widths) != 1:
        raise SchemaError("model.trees: trees disagree on input width")
    feature_names = _get(doc, "feature_names", list, "model")
    if len(feature_names) != trees[0].input_width:
        raise SchemaError("model.feature_names: length != tree input width")
    return LCEModel(
        trees=trees,
        task=task,
        input_width=trees[0].input_width,
        feature_names=[str(n) for n in feature_names],
        class_names=[str(n) for n in class_names] if class_names is not None else None,
        label_name=_get(doc, "label_name", str, "model"),
        config=_load_config(_get(doc, "config", dict, "model"), "model.config"),
    )
