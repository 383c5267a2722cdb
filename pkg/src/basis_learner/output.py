"""Output-layer losses and the regularized linear fit over the features.

Four convex losses, all averaged over the m instances: squared, hinge,
logistic, and multiclass hinge. The regularized objective is always

    loss(F w, y) + (lambda / 2) ||w||^2

Squared loss is minimized exactly through the normal equations; the
margin losses run averaged stochastic subgradient descent with a seeded
shuffle, so a fit is deterministic given its config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOSS_KINDS = ("squared", "hinge", "logistic", "mc-hinge")


@dataclass(frozen=True)
class OptimizerConfig:
    """Subgradient-descent budget for the non-squared losses.

    Step size is 1/(lambda * s) when lambda > 0 and eta0/sqrt(s) when
    lambda = 0, s counting steps from 1. The returned weights are the
    average of the iterates from the second half of the run.
    """

    epochs: int = 50
    eta0: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class FitResult:
    weights: np.ndarray          # n_features x n_outputs
    train_loss: float            # regularized objective at the returned weights
    train_error_rate: float      # misclassification rate, or MSE for regression


def _scores_matrix(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores[:, None]
    if scores.ndim != 2:
        raise ValueError(f"scores must be a vector or matrix, got shape {scores.shape}")
    return scores


def loss_value(kind: str, scores, y) -> float:
    """Mean loss of the given scores against labels ``y``.

    Binary losses take one score column and labels in {-1,+1}; the
    multiclass hinge takes an m x k score matrix and integer class ids.
    """
    S = _scores_matrix(scores)
    y = np.asarray(y)
    m = S.shape[0]
    if y.shape[0] != m:
        raise ValueError("scores and labels disagree on m")
    if kind == "squared":
        Y = y[:, None] if y.ndim == 1 else y
        if Y.shape != S.shape:
            raise ValueError("squared loss needs one target per score")
        return float(np.sum((S - Y) ** 2) / m)
    if kind == "hinge":
        v = S[:, 0]
        return float(np.maximum(0.0, 1.0 - y * v).mean())
    if kind == "logistic":
        v = S[:, 0]
        return float(np.logaddexp(0.0, -y * v).mean())
    if kind == "mc-hinge":
        if S.shape[1] < 2:
            raise ValueError("mc-hinge needs at least two score columns")
        idx = y.astype(np.int64)
        true = S[np.arange(m), idx]
        masked = S.copy()
        masked[np.arange(m), idx] = -np.inf
        rival = masked.max(axis=1)
        return float(np.maximum(0.0, 1.0 + rival - true).mean())
    raise ValueError(f"unknown loss kind {kind!r}")


def decide(kind: str, scores) -> np.ndarray:
    """Decision rule: sign for binary (0 counts as +1), argmax for
    multiclass with ties going to the lowest class id, identity for
    squared scores."""
    S = _scores_matrix(scores)
    if kind == "squared":
        return S[:, 0]
    if kind in ("hinge", "logistic"):
        return np.where(S[:, 0] >= 0.0, 1.0, -1.0)
    if kind == "mc-hinge":
        return S.argmax(axis=1).astype(np.int64)
    raise ValueError(f"unknown loss kind {kind!r}")


def error_rate(kind: str, scores, y) -> float:
    """Misclassification rate under :func:`decide`; MSE for squared."""
    y = np.asarray(y)
    if kind == "squared":
        S = _scores_matrix(scores)
        Y = y[:, None] if y.ndim == 1 else y
        return float(np.mean((S - Y) ** 2))
    pred = decide(kind, scores)
    return float(np.mean(pred != y))


def loss_gradient(kind: str, scores, y) -> np.ndarray:
    """Gradient of :func:`loss_value` with respect to the scores.

    Returns an array shaped like the score matrix. At hinge kinks the
    inactive subgradient (zero) is returned, matching the update rule the
    stochastic solver applies there.
    """
    S = _scores_matrix(scores)
    y = np.asarray(y)
    m = S.shape[0]
    G = np.zeros_like(S)
    if kind == "squared":
        Y = y[:, None] if y.ndim == 1 else y
        return 2.0 * (S - Y) / m
    if kind == "hinge":
        z = y * S[:, 0]
        G[:, 0] = np.where(z < 1.0, -y, 0.0) / m
        return G
    if kind == "logistic":
        z = y * S[:, 0]
        e = np.exp(-np.abs(z))
        sig_neg = np.where(z > 0.0, e, 1.0) / (1.0 + e)
        G[:, 0] = -y * sig_neg / m
        return G
    if kind == "mc-hinge":
        idx = y.astype(np.int64)
        rows = np.arange(m)
        true = S[rows, idx]
        masked = S.copy()
        masked[rows, idx] = -np.inf
        rival = masked.argmax(axis=1)
        active = 1.0 + masked[rows, rival] - true > 0.0
        G[rows[active], rival[active]] = 1.0 / m
        G[rows[active], idx[active]] = -1.0 / m
        return G
    raise ValueError(f"unknown loss kind {kind!r}")


def objective(kind: str, F, w, y, lam: float) -> float:
    return loss_value(kind, F @ w, y) + 0.5 * lam * float(np.sum(np.asarray(w) ** 2))


def _solve_squared(F: np.ndarray, Y: np.ndarray, lam: float) -> np.ndarray:
    m, n = F.shape
    if lam == 0.0:
        # minimum-norm solution when F is rank deficient
        w, *_ = np.linalg.lstsq(F, Y, rcond=None)
        return w
    # minimizing (1/m)||Fw - y||^2 + (lam/2)||w||^2 is the augmented
    # least-squares problem [F; sqrt(lam m / 2) I] w = [y; 0]
    root = math.sqrt(lam * m / 2.0)
    A = np.vstack([F, root * np.eye(n)])
    B = np.vstack([Y, np.zeros((n, Y.shape[1]))])
    w, *_ = np.linalg.lstsq(A, B, rcond=None)
    return w


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _sgd(F, y, kind, lam, opt, k):
    m, n = F.shape
    W = np.zeros((n, k))
    acc = np.zeros_like(W)
    acc_count = 0
    total = opt.epochs * m
    half = total // 2
    rng = np.random.default_rng(opt.seed)
    yi_int = y.astype(np.int64) if kind == "mc-hinge" else None
    s = 0
    for _ in range(opt.epochs):
        order = rng.permutation(m)
        for i in order:
            s += 1
            eta = 1.0 / (lam * s) if lam > 0.0 else opt.eta0 / math.sqrt(s)
            f = F[i]
            if lam > 0.0:
                W *= 1.0 - eta * lam
            if kind == "hinge":
                if y[i] * float(f @ W[:, 0]) < 1.0:
                    W[:, 0] += eta * y[i] * f
            elif kind == "logistic":
                margin = y[i] * float(f @ W[:, 0])
                W[:, 0] += eta * y[i] * _sigmoid(-margin) * f
            else:  # mc-hinge
                scores = f @ W
                c = yi_int[i]
                sc = scores[c]
                scores[c] = -np.inf
                rival = int(np.argmax(scores))
                if 1.0 + scores[rival] - sc > 0.0:
                    W[:, rival] -= eta * f
                    W[:, c] += eta * f
            if s > half:
                acc += W
                acc_count += 1
    return acc / max(acc_count, 1)


def fit_head(
    F,
    y,
    kind: str,
    lam: float,
    opt: OptimizerConfig | None = None,
    n_classes: int | None = None,
    task: str | None = None,
) -> FitResult:
    """Fit output weights over the feature matrix ``F``.

    Squared loss is solved exactly (minimum-norm at lambda = 0); the
    margin losses use the averaged subgradient method configured by
    ``opt``. ``n_classes`` fixes the weight-column count for mc-hinge;
    by default it is one more than the largest class id seen. ``task``
    selects the error metric when it differs from the loss's natural one
    (a binary task fit with squared loss reports misclassification, not
    MSE).
    """
    F = np.asarray(F, dtype=np.float64)
    y = np.asarray(y)
    if F.ndim != 2:
        raise ValueError("F must be a matrix")
    if kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind {kind!r}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if opt is None:
        opt = OptimizerConfig()

    if kind == "squared":
        Y = y[:, None] if y.ndim == 1 else np.asarray(y, dtype=np.float64)
        W = _solve_squared(F, Y, lam)
        y_eval = y
    else:
        if y.ndim != 1:
            raise ValueError(f"{kind} expects a label vector")
        if kind == "mc-hinge":
            k = int(y.max()) + 1 if n_classes is None else n_classes
            if k < 2:
                raise ValueError("mc-hinge requires at least 2 classes")
        else:
            k = 1
        W = _sgd(F, np.asarray(y, dtype=np.float64), kind, lam, opt, k)
        y_eval = y
    scores = F @ W
    if task is None or y_eval.ndim != 1:
        err = error_rate(kind, scores, y_eval)
    else:
        err = validation_error(F, W, y_eval, task)
    return FitResult(
        weights=W,
        train_loss=loss_value(kind, scores, y_eval) + 0.5 * lam * float(np.sum(W ** 2)),
        train_error_rate=err,
    )


def validation_error(features, weights, y, task: str) -> float:
    """Held-out error of a linear head: misclassification rate for the
    classification tasks, MSE for regression."""
    features = np.asarray(features, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    scores = features @ weights
    y = np.asarray(y)
    if task == "regression":
        return float(np.mean((scores[:, 0] - y) ** 2))
    if task == "binary":
        pred = np.where(scores[:, 0] >= 0.0, 1.0, -1.0)
        return float(np.mean(pred != y))
    if task == "multiclass":
        return float(np.mean(scores.argmax(axis=1) != y))
    raise ValueError(f"unknown task {task!r}")
