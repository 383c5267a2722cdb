"""Training driver: grow the basis depth by depth, fit heads, keep the best.

The loop builds feature layer 1, then alternates between (a) fitting one
output head per regularization value over all features built so far and
(b) constructing the next layer. Heads are scored on the validation
split when one exists, otherwise by training objective; the returned
network is the best (depth, lambda) pair seen anywhere in the run, not
the last one. Stopping: training loss under a threshold, validation not
improving for a configured number of consecutive depths, the depth cap,
or a layer coming back empty (span saturated / no useful candidate).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .basis import (
    build_basis1_exact,
    build_basis1_width,
    build_basis_t_exact,
    build_basis_t_width,
    default_tol,
    initial_state,
    lift_input,
)
from .dataset import LabeledDataset, target_matrix
from .network import OutputHead, PolyNetwork, feature_matrix, product_layer
from .output import OptimizerConfig, fit_head, loss_value, validation_error

# 10^-7, 10^-6.5, ..., 10^1 (17 values)
DEFAULT_LAMBDA_GRID: tuple[float, ...] = tuple(
    10.0 ** (-7.0 + 0.5 * i) for i in range(17)
)


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run depends on besides the data.

    ``max_depth`` counts the output layer, so a network of depth D has
    D-2 product layers; None leaves depth uncapped. ``tol`` of None uses
    the scale-aware default independence threshold. ``error_threshold``
    stops as soon as the depth-best training loss falls under it.
    """

    mode: str = "exact"
    gamma: int = 50
    max_depth: int | None = None
    batch: int = 50
    tol: float | None = None
    loss: str = "squared"
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    svd: str = "exact"
    patience: int = 2
    error_threshold: float | None = None
    seed: int = 0
    sgd_epochs: int = 50

    def __post_init__(self):
        if self.mode not in ("exact", "width"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.svd not in ("exact", "randomized"):
            raise ValueError(f"unknown svd choice {self.svd!r}")
        if self.loss not in ("squared", "hinge", "logistic", "mc-hinge"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.mode == "width":
            if self.gamma < 1:
                raise ValueError("width mode needs gamma >= 1")
            if not (1 <= self.batch <= self.gamma):
                raise ValueError("need 1 <= batch <= gamma")
        if self.max_depth is not None and self.max_depth < 2:
            raise ValueError("max_depth counts the output layer and must be >= 2")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not self.lambda_grid or any(l < 0 for l in self.lambda_grid):
            raise ValueError("lambda grid must be nonempty and nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class DepthRecord:
    """One trace line: the state of the run at a given network depth."""

    depth: int
    layer_width: int
    total_cols: int
    lam: float
    train_loss: float
    train_err: float
    valid_err: float  # nan when there is no validation split
    secs: float

    def line(self) -> str:
        return (
            f"depth={self.depth} layer_width={self.layer_width} "
            f"total_cols={self.total_cols} lambda={self.lam!r} "
            f"train_loss={self.train_loss!r} train_err={self.train_err!r} "
            f"valid_err={self.valid_err!r} secs={self.secs:.3f}"
        )


@dataclass
class TrainingTrace:
    records: list[DepthRecord]
    termination: str
    best_depth: int
    best_lambda: float
    best_train_loss: float
    best_train_err: float
    best_valid_err: float
    warnings: list[str] = field(default_factory=list)
    # training-row values of the returned network's nodes, column per node
    feature_columns: np.ndarray | None = None

    def lines(self) -> list[str]:
        return [r.line() for r in self.records]

    def header(self) -> dict:
        """Provenance summary: deterministic, no wall-clock content."""
        return {
            "termination": self.termination,
            "depths_trained": len(self.records),
            "best_depth": self.best_depth,
            "best_lambda": self.best_lambda,
            "best_train_loss": self.best_train_loss,
            "best_train_err": self.best_train_err,
            "best_valid_err": None if math.isnan(self.best_valid_err) else self.best_valid_err,
            "warnings": list(self.warnings),
        }


def _fit_target(ds: LabeledDataset, loss: str):
    if loss == "squared":
        return target_matrix(ds)
    if loss in ("hinge", "logistic"):
        if ds.task != "binary":
            raise ValueError(f"{loss} loss needs binary -1/+1 labels")
        return np.asarray(ds.labels, dtype=np.float64)
    if ds.task != "multiclass":
        raise ValueError("mc-hinge loss needs multiclass labels")
    return ds.labels


def _head_seed(seed: int, depth: int, lam_index: int) -> int:
    return int(np.random.SeedSequence((seed, depth, lam_index)).generate_state(1)[0])


class _ValidFeatures:
    """Validation-set node values, grown one layer at a time through the
    same (W1, triples) evaluation the deployed network uses."""

    def __init__(self, X: np.ndarray, W1: np.ndarray):
        self.N1 = lift_input(X) @ W1
        self.blocks = [self.N1]

    def add_layer(self, nodes) -> None:
        prev = self.blocks[-1]
        idx_p = np.array([ref.prev_col for ref, _ in nodes], dtype=np.int64)
        idx_f = np.array([ref.first_col for ref, _ in nodes], dtype=np.int64)
        w = np.array([wt for _, wt in nodes], dtype=np.float64)
        self.blocks.append(prev[:, idx_p] * self.N1[:, idx_f] * w)

    def matrix(self) -> np.ndarray:
        return np.hstack(self.blocks)


def train(
    train_ds: LabeledDataset,
    valid_ds: LabeledDataset | None,
    config: TrainConfig,
) -> tuple[PolyNetwork, TrainingTrace]:
    """Run the full constructive algorithm; returns the model and trace.

    ``valid_ds`` may be None or empty only when ``error_threshold`` or
    ``max_depth`` will eventually stop the run.
    """
    if train_ds.m < 1:
        raise ValueError("training set is empty")
    has_valid = valid_ds is not None and valid_ds.m > 0
    if not has_valid and config.error_threshold is None and config.max_depth is None:
        raise ValueError(
            "without a validation split, set error_threshold or max_depth"
        )
    warnings: list[str] = []
    if not train_ds.distinct:
        warnings.append(
            "training rows are not pairwise distinct; exact-interpolation "
            "guarantees do not apply"
        )

    m = train_ds.m
    tol = config.tol if config.tol is not None else default_tol(m)
    lifted = lift_input(train_ds.X)
    if config.mode == "exact":
        layer1 = build_basis1_exact(lifted)
    else:
        layer1 = build_basis1_width(
            lifted, config.gamma, svd_mode=config.svd, seed=config.seed
        )
    state = initial_state(layer1, tol)
    layer_results = [layer1]

    fit_y = _fit_target(train_ds, config.loss)
    n_classes = train_ds.n_classes if train_ds.task == "multiclass" else None
    select_target = target_matrix(train_ds)
    vf = _ValidFeatures(valid_ds.X, layer1.W1) if has_valid else None

    records: list[DepthRecord] = []
    best: dict | None = None
    best_valid_so_far = math.inf
    no_improve = 0
    termination = "depth_cap"
    t = 2
    while True:
        t0 = time.perf_counter()
        F = state.F
        ncols = state.ncols
        valid_F = vf.matrix() if has_valid else None

        depth_best: dict | None = None
        for li, lam in enumerate(config.lambda_grid):
            opt = OptimizerConfig(
                epochs=config.sgd_epochs, seed=_head_seed(config.seed, t, li)
            )
            fit = fit_head(
                F, fit_y, config.loss, lam, opt,
                n_classes=n_classes, task=train_ds.task,
            )
            t_err = validation_error(F, fit.weights, train_ds.labels, train_ds.task)
            if has_valid:
                v_err = validation_error(
                    valid_F, fit.weights, valid_ds.labels, valid_ds.task
                )
                key = v_err
            else:
                v_err = math.nan
                key = fit.train_loss
            if depth_best is None or key < depth_best["key"]:
                depth_best = {
                    "key": key, "lam": lam, "weights": fit.weights,
                    "train_loss": fit.train_loss, "train_err": t_err,
                    "valid_err": v_err,
                }

        if best is None or depth_best["key"] < best["key"]:
            best = dict(depth_best, depth=t, ncols=ncols)
        if has_valid:
            if depth_best["valid_err"] < best_valid_so_far:
                best_valid_so_far = depth_best["valid_err"]
                no_improve = 0
            else:
                no_improve += 1

        layer_width = state.layer_ranges[-1][1] - state.layer_ranges[-1][0]

        def record(secs: float) -> None:
            records.append(DepthRecord(
                depth=t, layer_width=layer_width, total_cols=ncols,
                lam=depth_best["lam"], train_loss=depth_best["train_loss"],
                train_err=depth_best["train_err"],
                valid_err=depth_best["valid_err"], secs=secs,
            ))

        if (config.error_threshold is not None
                and depth_best["train_loss"] <= config.error_threshold):
            termination = "error_threshold"
            record(time.perf_counter() - t0)
            break
        if has_valid and no_improve >= config.patience:
            termination = "validation_stop"
            record(time.perf_counter() - t0)
            break
        if config.max_depth is not None and t >= config.max_depth:
            termination = "depth_cap"
            record(time.perf_counter() - t0)
            break

        if config.mode == "exact":
            built = build_basis_t_exact(state, tol)
        else:
            built = build_basis_t_width(
                state, select_target, config.gamma, config.batch, tol
            )
        if built.width == 0:
            termination = "empty_layer"
            record(time.perf_counter() - t0)
            break
        layer_results.append(built)
        if has_valid:
            vf.add_layer(built.nodes)
        record(time.perf_counter() - t0)
        t += 1

    assert best is not None
    n_feature_layers = best["depth"] - 1
    product_layers = tuple(
        product_layer([(r.prev_col, r.first_col, w) for r, w in lr.nodes])
        for lr in layer_results[1:n_feature_layers]
    )
    head = OutputHead(
        weights=np.asarray(best["weights"], dtype=np.float64),
        loss=config.loss,
        lam=best["lam"],
    )
    trace = TrainingTrace(
        records=records,
        termination=termination,
        best_depth=best["depth"],
        best_lambda=best["lam"],
        best_train_loss=best["train_loss"],
        best_train_err=best["train_err"],
        best_valid_err=best["valid_err"],
        warnings=warnings,
        feature_columns=state.F[:, : best["ncols"]].copy(),
    )
    # provenance lives inside the JSON model file, so keep it JSON-native
    # (tuples would come back as lists and break round-trip equality)
    cfg_doc = asdict(config)
    cfg_doc["lambda_grid"] = list(cfg_doc["lambda_grid"])
    net = PolyNetwork(
        input_dim=train_ds.dim,
        task=train_ds.task,
        W1=layer1.W1,
        product_layers=product_layers,
        head=head,
        n_classes=train_ds.n_classes if train_ds.task == "multiclass" else 0,
        provenance={"config": cfg_doc, "trace": trace.header()},
    )
    if net.total_nodes != best["ncols"]:
        raise AssertionError("network width disagrees with stored features")
    return net, trace


def evaluate(net: PolyNetwork, ds: LabeledDataset) -> dict:
    """Metrics block for a dataset: error (rate or MSE), mean loss, and a
    per-class confusion matrix for multiclass tasks."""
    if ds.m < 1:
        raise ValueError("cannot evaluate on an empty dataset")
    if ds.task != net.task:
        raise ValueError(f"dataset task {ds.task!r} does not match model {net.task!r}")
    F = feature_matrix(net, ds.X)
    scores = F @ net.head.weights
    err = validation_error(F, net.head.weights, ds.labels, ds.task)
    if net.head.loss == "squared":
        y = target_matrix(ds)
    else:
        y = ds.labels
    metrics = {
        "m": ds.m,
        "error": err,
        "mean_loss": loss_value(net.head.loss, scores, y),
    }
    if ds.task == "multiclass":
        k = net.n_classes
        pred = scores.argmax(axis=1)
        conf = np.zeros((k, k), dtype=np.int64)
        np.add.at(conf, (ds.labels, pred), 1)
        metrics["confusion"] = conf
    return metrics
