"""Command-line front end.

Subcommands: ``train`` fits a model and writes it with a trace log,
``predict`` scores new rows, ``evaluate`` prints metrics against labeled
data, ``inspect`` summarizes a saved model. Exit codes: 0 success, 1
runtime failure, 2 usage error; all error text goes to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dataset import DatasetFormatError, SplitSpec, load_dense, split
from .network import (
    ModelFormatError,
    arithmetic_cost,
    feature_matrix,
    load_model,
    predict,
    save_model,
)
from .oracle import monomial_count, monomial_matrix, span_equal, span_rank
from .trainer import DEFAULT_LAMBDA_GRID, TrainConfig, evaluate, train


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset file")
    p.add_argument("--format", choices=("csv", "sparse"), default="csv")
    p.add_argument("--header", action="store_true", help="skip one header line")
    p.add_argument("--dims", type=int, default=None,
                   help="feature count for sparse data (default: max index)")


def _parse_lambdas(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda list {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty lambda list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="basis-learner",
        description="Constructive layer-by-layer training of polynomial networks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="fit a model and write it to disk")
    _add_data_flags(tr)
    tr.add_argument("--out", required=True, help="model output path")
    tr.add_argument("--mode", choices=("exact", "width"), default="exact")
    tr.add_argument("--width", type=int, default=50, metavar="GAMMA",
                    help="per-layer node budget in width mode (default 50)")
    tr.add_argument("--depth", type=int, default=None, metavar="DELTA",
                    help="max depth counting the output layer (default: uncapped)")
    tr.add_argument("--batch", type=int, default=50,
                    help="columns admitted per selection round (default 50)")
    tr.add_argument("--loss", choices=("squared", "hinge", "logistic", "mc-hinge"),
                    default="squared")
    tr.add_argument("--lambda", dest="lambdas", type=_parse_lambdas, default=None,
                    metavar="LIST", help="comma-separated regularization grid "
                    "(default: 10^-7 .. 10^1 in half-decade steps)")
    tr.add_argument("--valid-count", type=int, default=0,
                    help="rows split off the tail for validation (default 0)")
    tr.add_argument("--patience", type=int, default=2,
                    help="stop after this many non-improving depths (default 2)")
    tr.add_argument("--stop-train-loss", type=float, default=None, metavar="EPS",
                    help="stop once training loss falls to EPS")
    tr.add_argument("--tol", type=float, default=None,
                    help="column-independence tolerance (default 1e-8*sqrt(m))")
    tr.add_argument("--svd", choices=("exact", "randomized"), default="exact")
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--trace-out", default=None, help="also write trace lines here")

    pr = sub.add_parser("predict", help="print score and decision per row")
    pr.add_argument("--model", required=True)
    _add_data_flags(pr)

    ev = sub.add_parser("evaluate", help="print metrics on labeled data")
    ev.add_argument("--model", required=True)
    _add_data_flags(ev)

    ins = sub.add_parser("inspect", help="print model architecture summary")
    ins.add_argument("--model", required=True)

    # debugging helper, deliberately undocumented in the top-level help
    orc = sub.add_parser("oracle")
    orc.add_argument("--degree", type=int, required=True)
    orc.add_argument("--model", default=None)
    _add_data_flags(orc)
    return ap


def _load(args, task=None):
    return load_dense(args.data, args.format, header=args.header,
                      dims=args.dims, task=task)


def _cmd_train(args) -> int:
    ds = _load(args)
    if args.loss in ("hinge", "logistic") and ds.task != "binary":
        raise ValueError(f"--loss {args.loss} needs -1/+1 labels, data looks {ds.task}")
    if args.loss == "mc-hinge" and ds.task != "multiclass":
        raise ValueError(f"--loss mc-hinge needs class-id labels, data looks {ds.task}")
    train_part, valid_part = split(ds, SplitSpec(args.valid_count))
    config = TrainConfig(
        mode=args.mode,
        gamma=args.width,
        max_depth=args.depth,
        batch=args.batch,
        tol=args.tol,
        loss=args.loss,
        lambda_grid=args.lambdas if args.lambdas is not None else DEFAULT_LAMBDA_GRID,
        svd=args.svd,
        patience=args.patience,
        error_threshold=args.stop_train_loss,
        seed=args.seed,
    )
    net, trace = train(train_part, valid_part, config)
    for w in trace.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for line in trace.lines():
        print(line)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(trace.lines()) + "\n")
    save_model(net, args.out)
    print(
        f"trained depth={trace.best_depth} nodes={net.total_nodes} "
        f"lambda={trace.best_lambda!r} train_loss={trace.best_train_loss!r} "
        f"train_err={trace.best_train_err!r} valid_err={trace.best_valid_err!r} "
        f"termination={trace.termination} model={args.out}"
    )
    return 0


def _cmd_predict(args) -> int:
    net = load_model(args.model)
    ds = _load(args, task=net.task)
    scores = np.atleast_2d(predict(net, ds.X))
    if net.task == "binary":
        labels = np.where(scores[:, 0] >= 0.0, 1, -1)
        for s, lab in zip(scores[:, 0], labels):
            print(f"{float(s)!r} {lab:+d}")
    elif net.task == "multiclass":
        labels = scores.argmax(axis=1)
        for row, lab in zip(scores, labels):
            print(" ".join(repr(float(s)) for s in row) + f" {lab}")
    else:
        for s in scores[:, 0]:
            print(repr(float(s)))
    return 0


def _cmd_evaluate(args) -> int:
    net = load_model(args.model)
    ds = _load(args, task=net.task)
    metrics = evaluate(net, ds)
    print(f"m: {metrics['m']}")
    print(f"error: {metrics['error']!r}")
    print(f"mean_loss: {metrics['mean_loss']!r}")
    if "confusion" in metrics:
        print("confusion:")
        for row in metrics["confusion"]:
            print("  " + " ".join(str(int(c)) for c in row))
    return 0


def _cmd_inspect(args) -> int:
    net = load_model(args.model)
    widths = net.layer_widths
    print("schema: basis-learner/1")
    print(f"input_dim: {net.input_dim}")
    print(f"task: {net.task}" + (f"({net.n_classes})" if net.task == "multiclass" else ""))
    print(f"depth: {net.depth}")
    print(f"degree_bound: {net.depth - 1}")
    print(f"layer_widths: {' '.join(str(w) for w in widths)}")
    print(f"product_layers: {len(net.product_layers)}")
    print(f"total_nodes: {net.total_nodes}")
    print(f"outputs: {net.outputs}")
    print(f"arithmetic_cost: {arithmetic_cost(net)}")
    print(f"loss: {net.head.loss}")
    print(f"lambda: {net.head.lam!r}")
    return 0


def _cmd_oracle(args) -> int:
    ds = _load(args)
    M = monomial_matrix(ds.X, args.degree)
    print(f"monomials: {monomial_count(ds.dim, args.degree)}")
    print(f"rank: {span_rank(M)}")
    if args.model:
        net = load_model(args.model)
        F = feature_matrix(net, ds.X)
        print(f"span_equal: {span_equal(F, M)}")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "inspect": _cmd_inspect,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DatasetFormatError, ModelFormatError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
