"""Command-line entry point.

Subcommands: ``train`` (fit a tree and write its trace), ``curves``
(normalize a trace into plot-ready CSV plus a rendered figure),
``bounds`` (closed-form split budgets) and ``verify`` (randomized
verification suites).  Every command is deterministic given its flags
and seed; each artifact-writing command also writes a manifest that
pins the inputs so a run can be reproduced bit for bit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bounds import BoundQuery, admissible_range, splits_required
from .criteria import GINI, SHANNON, Criterion, modified_gini
from .data import DataFormatError, SplitSpec, parse_sparse_file, split_dataset
from .learner import TrainConfig, TraceRecord, normalize_trace, train
from .tree import dump_tree
from .verify import run_all

SEED_ENV_VAR = "LOMBOOST_SEED"
DEFAULT_SEED = 1

LEARNING_RATE_GRID = (0.25, 0.5, 0.75, 1.0, 2.0, 4.0, 8.0)

TRACE_COLUMNS = (
    "t",
    "node_id",
    "j_value",
    "gamma_hat",
    "entropy",
    "gini",
    "modified_gini",
    "test_error",
)
CURVES_COLUMNS = ("t", "entropy", "gini", "modified_gini", "test_error")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.9g}"


def _write_atomic(path: Path, content: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8", newline="")
    os.replace(tmp, path)


def _write_manifest(path: Path, payload: dict) -> None:
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _trace_csv(records: list[TraceRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.t,
                r.node_id,
                _fmt(r.j_value),
                _fmt(r.gamma_hat),
                _fmt(r.g_e),
                _fmt(r.g_g),
                _fmt(r.g_m),
                _fmt(r.test_error),
            ]
        )
    return out.getvalue()


def _read_trace_csv(path: Path) -> list[TraceRecord]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(TRACE_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise DataFormatError(
                f"{path}: trace is missing columns {sorted(missing)}"
            )
        records = []
        for row in reader:
            records.append(
                TraceRecord(
                    t=int(row["t"]),
                    node_id=int(row["node_id"]),
                    j_value=float(row["j_value"]),
                    gamma_hat=float(row["gamma_hat"]),
                    g_e=float(row["entropy"]),
                    g_g=float(row["gini"]),
                    g_m=float(row["modified_gini"]),
                    test_error=float(row["test_error"]) if row["test_error"] else None,
                )
            )
    if not records:
        raise DataFormatError(f"{path}: trace holds no records")
    return records


def _criterion_from_flags(name: str, c: float) -> Criterion:
    if name == "entropy":
        return SHANNON
    if name == "gini":
        return GINI
    return modified_gini(c)


def cmd_train(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = Path(args.data)
    dataset = parse_sparse_file(data_path)
    train_set, valid_set, test_set = split_dataset(dataset, SplitSpec(seed=args.seed))

    learning_rate = args.lr
    sweep_errors = None
    if args.lr_sweep:
        if len(valid_set) == 0:
            raise ValueError("dataset too small to carve out a validation set")
        sweep_errors = {}
        for candidate in LEARNING_RATE_GRID:
            config = TrainConfig(
                max_splits=args.splits,
                epochs_per_split=args.epochs,
                learning_rate=candidate,
                seed=args.seed,
                criterion_C=args.C,
            )
            _, records = train(train_set, config, eval_data=valid_set)
            sweep_errors[candidate] = records[-1].test_error
        learning_rate = min(LEARNING_RATE_GRID, key=lambda lr: (sweep_errors[lr], lr))

    config = TrainConfig(
        max_splits=args.splits,
        epochs_per_split=args.epochs,
        learning_rate=learning_rate,
        seed=args.seed,
        criterion_C=args.C,
    )
    tree, records = train(train_set, config, eval_data=test_set)

    tree_path = out_dir / "tree"
    trace_path = out_dir / "trace.csv"
    manifest_path = out_dir / "manifest"
    _write_atomic(tree_path, dump_tree(tree))
    _write_atomic(trace_path, _trace_csv(records))
    manifest = {
        "command": "train",
        "package_version": __version__,
        "seed": args.seed,
        "config": {
            "splits": args.splits,
            "epochs": args.epochs,
            "learning_rate": learning_rate,
            "lr_sweep": bool(args.lr_sweep),
            "criterion_C": args.C,
        },
        "dataset": {
            "path": str(data_path),
            "sha256": _sha256(data_path),
            "examples": len(dataset),
            "classes": dataset.num_classes,
            "features": dataset.num_features,
        },
        "artifacts": {"tree": tree_path.name, "trace": trace_path.name},
    }
    if sweep_errors is not None:
        manifest["lr_sweep_validation_error"] = {
            f"{lr:g}": err for lr, err in sweep_errors.items()
        }
    _write_manifest(manifest_path, manifest)
    final_error = records[-1].test_error
    print(f"final test error: {_fmt(final_error)}")
    return 0


def cmd_curves(args) -> int:
    trace_path = Path(args.trace)
    if not trace_path.exists():
        raise DataFormatError(f"trace file not found: {trace_path}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = _read_trace_csv(trace_path)
    normalized = normalize_trace(records)

    rows = [
        {
            "t": r.t,
            "entropy": r.g_e,
            "gini": r.g_g,
            "modified_gini": r.g_m,
            "test_error": r.test_error,
        }
        for r in normalized
    ]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURVES_COLUMNS)
    for row in rows:
        writer.writerow(
            [row["t"]] + [_fmt(row[key]) for key in CURVES_COLUMNS[1:]]
        )
    curves_path = out_dir / "curves.csv"
    figure_path = out_dir / "curves.png"
    _write_atomic(curves_path, out.getvalue())
    from .plots import render_curves

    render_curves(rows, figure_path)
    _write_manifest(
        out_dir / "manifest",
        {
            "command": "curves",
            "package_version": __version__,
            "trace": {"path": str(trace_path), "sha256": _sha256(trace_path)},
            "artifacts": {
                "curves": curves_path.name,
                "figure": figure_path.name,
            },
        },
    )
    return 0


def cmd_bounds(args) -> int:
    names = ["entropy", "gini", "mgini"] if args.criterion == "all" else [args.criterion]
    failed = False
    lines = []
    for name in names:
        kind = _criterion_from_flags(name, args.C)
        try:
            budget = splits_required(
                BoundQuery(kind, args.k, args.gamma, args.alpha)
            )
        except ValueError as error:
            failed = True
            print(f"error: {error}", file=sys.stderr)
            if "outside admissible range" in str(error):
                lo, hi = admissible_range(kind, args.k)
                print(
                    f"admissible alpha for {name} at k={args.k}: [{lo:.9g}, {hi:.9g}]",
                    file=sys.stderr,
                )
            else:
                return 1
            continue
        lines.append((name, str(budget)))
    if len(names) == 1 and lines:
        print(lines[0][1])
    else:
        for name, text in lines:
            print(f"{name}: {text}")
    return 1 if failed else 0


def cmd_verify(args) -> int:
    results = run_all(args.trials, args.seed, modulus_scale=args.inject_faulty_modulus)
    failed = False
    for result in results:
        print(result.line())
        if not result.passed:
            failed = True
            print(f"  counterexample: {json.dumps(result.counterexample, sort_keys=True)}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lomboost",
        description=(
            "Multiclass decision trees split by the balanced-and-pure "
            "objective, with criterion traces, split budgets and a "
            "verification suite."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train_p = sub.add_parser("train", help="train a tree and write its trace")
    train_p.add_argument("--data", required=True, help="sparse-format dataset file")
    train_p.add_argument("--out", required=True, help="output directory")
    train_p.add_argument("--splits", type=int, default=31)
    train_p.add_argument("--lr", type=float, default=0.5)
    train_p.add_argument(
        "--lr-sweep",
        action="store_true",
        help=f"pick the learning rate from {LEARNING_RATE_GRID} by validation error",
    )
    train_p.add_argument("--epochs", type=int, default=20)
    train_p.add_argument("--seed", type=int, default=_default_seed())
    train_p.add_argument("--C", type=float, default=4.0, help="mgini constant (> 2)")
    train_p.set_defaults(func=cmd_train)

    curves_p = sub.add_parser(
        "curves", help="normalize a trace into plot-ready CSV and a figure"
    )
    curves_p.add_argument("--trace", required=True, help="trace.csv from train")
    curves_p.add_argument("--out", required=True, help="output directory")
    curves_p.set_defaults(func=cmd_curves)

    bounds_p = sub.add_parser("bounds", help="split budgets for a criterion target")
    bounds_p.add_argument(
        "--criterion",
        choices=("entropy", "gini", "mgini", "all"),
        default="all",
    )
    bounds_p.add_argument("--k", type=int, required=True, help="number of classes")
    bounds_p.add_argument(
        "--gamma", type=float, required=True, help="weak-learning advantage in (0, 0.5]"
    )
    bounds_p.add_argument("--alpha", type=float, required=True, help="criterion target")
    bounds_p.add_argument("--C", type=float, default=4.0, help="mgini constant (> 2)")
    bounds_p.set_defaults(func=cmd_bounds)

    verify_p = sub.add_parser("verify", help="run the randomized verification suites")
    verify_p.add_argument("--trials", type=int, default=100_000)
    verify_p.add_argument("--seed", type=int, default=_default_seed())
    verify_p.add_argument(
        "--inject-faulty-modulus",
        type=float,
        default=1.0,
        help=argparse.SUPPRESS,
    )
    verify_p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataFormatError, ValueError, OSError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
