"""Command-line interface: train, predict, evaluate, bench.

Diagnostics go to stderr; data and reports go to stdout or --out. Exit codes:
0 success, 1 data/model errors, 2 usage errors. --seed determines every
stochastic choice end to end; --parallelism falls back to the LCE_THREADS
environment variable, then to all cores.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import ensemble, evaluation, model_io
from .cascade import CascadeConfig
from .dataset import CLASSIFICATION, REGRESSION, DatasetError, load_csv
from .ensemble import LCEConfig
from .tuning import SearchSpace, grid_search_cv


def _add_parallelism(p):
    p.add_argument(
        "--parallelism",
        type=int,
        default=None,
        help="worker processes (default: LCE_THREADS env var, else all cores)",
    )


def _parallelism_of(args):
    if args.parallelism is not None:
        return args.parallelism
    env = os.environ.get("LCE_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise DatasetError(f"LCE_THREADS must be an integer, got {env!r}") from None
    return None


def _parse_grid(spec: str) -> SearchSpace:
    """Parse 'n_estimators=5,10;max_depth=1,2' into a SearchSpace."""
    values = {}
    for part in spec.split(";"):
        if "=" not in part:
            raise DatasetError(f"bad grid component {part!r}")
        name, _, options = part.partition("=")
        name = name.strip()
        if name not in ("n_estimators", "max_depth"):
            raise DatasetError(f"unknown grid parameter {name!r}")
        try:
            values[name] = [int(v) for v in options.split(",")]
        except ValueError:
            raise DatasetError(f"non-integer grid value in {part!r}") from None
    if not values:
        raise DatasetError("empty grid spec")
    return SearchSpace(values)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="lce",
        description="Local Cascade Ensemble: train, predict, evaluate, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on a labeled CSV")
    p.add_argument("--data", required=True, help="training CSV path")
    p.add_argument("--label", required=True, help="label column name")
    p.add_argument("--task", choices=[CLASSIFICATION, REGRESSION], default=CLASSIFICATION)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-estimators", type=int, default=10)
    p.add_argument("--max-depth", type=int, default=2, help="cascade tree depth")
    p.add_argument("--min-samples-split", type=int, default=2)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--tuning-budget", type=int, default=3)
    p.add_argument(
        "--grid",
        default=None,
        help="grid-search spec like 'n_estimators=5,10;max_depth=1,2' "
        "(3-fold CV on the training data)",
    )
    _add_parallelism(p)

    p = sub.add_parser("predict", help="write predictions for a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="feature CSV (model schema)")
    p.add_argument("--out", default=None, help="predictions CSV (default stdout)")
    p.add_argument("--proba", action="store_true", help="include probability columns")

    p = sub.add_parser("evaluate", help="print accuracy of a model on a labeled CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("bench", help="run the benchmark suite or rank a table")
    p.add_argument("--manifest", default=None, help="benchmark manifest JSON")
    p.add_argument(
        "--from-table",
        default=None,
        help="accuracy CSV (dataset,<method>,... header); computes rank rows only",
    )
    p.add_argument("--modes", default="lce,bagged_trees,gbt")
    p.add_argument("--out", default=None, help="write the report as CSV")
    _add_parallelism(p)
    return parser


def _cmd_train(args) -> int:
    ds = load_csv(args.data, args.label, args.task)
    parallelism = _parallelism_of(args)
    n_estimators, max_depth = args.n_estimators, args.max_depth
    chosen = None
    if args.grid:
        space = _parse_grid(args.grid)
        result = grid_search_cv(ds, space, 3, args.seed, mode="lce", parallelism=parallelism)
        chosen = result.best
        n_estimators = chosen.get("n_estimators", n_estimators)
        max_depth = chosen.get("max_depth", max_depth)
    config = LCEConfig(
        n_estimators=n_estimators,
        cascade=CascadeConfig(
            max_depth=max_depth,
            min_samples_split=args.min_samples_split,
            min_samples_leaf=args.min_samples_leaf,
            tuning_budget=args.tuning_budget,
            task=ds.task,
        ),
        seed=args.seed,
        parallelism=parallelism,
    )
    model = ensemble.fit(ds, config)
    model_io.save(model, args.out)
    summary = f"trained {n_estimators} trees (cascade depth <= {max_depth}) on {ds.rows} rows"
    if chosen is not None:
        summary += f"; grid selected n_estimators={n_estimators}, max_depth={max_depth}"
    print(summary)
    return 0


def _peek_header(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline().rstrip("\n")
    except FileNotFoundError:
        raise DatasetError(f"no such file: {path}") from None
    if not first:
        raise DatasetError(f"{path}: empty file")
    return first.split(",")


def _read_feature_matrix(path, model):
    from .dataset import DEFAULT_MISSING_TOKENS, _parse_cell

    header = _peek_header(path)
    columns = [c for c in header if c != model.label_name]
    if columns != list(model.feature_names):
        extra = [c for c in columns if c not in model.feature_names]
        missing = [c for c in model.feature_names if c not in columns]
        if extra:
            raise DatasetError(f"{path}: unexpected column {extra[0]!r}")
        if missing:
            raise DatasetError(f"{path}: missing column {missing[0]!r}")
        raise DatasetError(f"{path}: column order does not match the model schema")
    keep = [i for i, c in enumerate(header) if c != model.label_name]
    tokens = set(DEFAULT_MISSING_TOKENS)
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DatasetError(
                f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
            )
        rows.append(
            [
                _parse_cell(cells[i], tokens, f"{path}:{lineno} column {header[i]!r}")
                for i in keep
            ]
        )
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def _cmd_predict(args) -> int:
    model = model_io.load(args.model)
    X = _read_feature_matrix(args.data, model)
    lines = []
    if model.task == CLASSIFICATION:
        probs = ensemble.predict_proba(model, X)
        labels = np.argmax(probs, axis=1)
        header = ["prediction"]
        if args.proba:
            header += list(model.class_names)
        lines.append(",".join(header))
        for i in range(len(X)):
            cells = [model.class_names[labels[i]]]
            if args.proba:
                cells += [repr(float(p)) for p in probs[i]]
            lines.append(",".join(cells))
    else:
        values = ensemble.predict(model, X)
        lines.append("prediction")
        lines += [repr(float(v)) for v in values]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_evaluate(args) -> int:
    model = model_io.load(args.model)
    ds = load_csv(args.data, model.label_name, model.task)
    if model.task == CLASSIFICATION:
        pred = ensemble.predict(model, ds.features)
        pred_names = [model.class_names[i] for i in pred]
        true_names = [ds.class_names[i] for i in ds.labels]
        acc = evaluation.accuracy(np.asarray(true_names), np.asarray(pred_names))
        print(f"Accuracy: {acc:.1f}%")
    else:
        pred = ensemble.predict(model, ds.features)
        print(f"MSE: {evaluation.mean_squared_error(ds.labels, pred):.6g}")
    return 0


def _cmd_bench(args) -> int:
    if (args.manifest is None) == (args.from_table is None):
        raise DatasetError("bench needs exactly one of --manifest or --from-table")
    if args.from_table:
        report = evaluation.table_report_from_csv(args.from_table)
    else:
        manifest = evaluation.load_manifest(args.manifest)
        modes = [m.strip() for m in args.modes.split(",") if m.strip()]
        report = evaluation.run_benchmark(manifest, modes, _parallelism_of(args))
    print(evaluation.format_report(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(evaluation.report_to_csv(report))
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
