"""Layer-by-layer construction of a polynomial feature basis.

The training rows induce a value matrix F (one column per network node,
columns kept linearly independent and normalized to second moment 1)
together with an orthonormal companion Q spanning the same space. Layer 1
comes from an SVD of the constant-lifted input. Every later layer draws
its candidate columns from Hadamard products of a previous-layer column
with a first-layer column; candidates are admitted either exhaustively
(every candidate that enlarges the span) or under a width budget via a
greedy target-driven selection. The full candidate matrix is never
materialized: candidates are generated and tested one block at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import check_matrix, randomized_range_svd, residual, thin_svd


def default_tol(m: int) -> float:
    """Independence threshold for residual norms, scaled to column norm √m."""
    return 1e-8 * math.sqrt(m)


@dataclass(frozen=True)
class CandidateRef:
    """Addresses a product candidate: previous-layer column x layer-1 column.

    Both indices are relative to their layer (0-based).
    """

    prev_col: int
    first_col: int


@dataclass(frozen=True)
class LayerBuildResult:
    """Columns added by one layer build.

    Layer 1 carries the (d+1) x k weight matrix ``W1``; product layers
    instead carry one (ref, weight) node per column, where the column
    equals weight times the Hadamard product the ref addresses.
    """

    new_columns: np.ndarray
    nodes: list[tuple[CandidateRef, float]] = field(default_factory=list)
    W1: np.ndarray | None = None

    @property
    def width(self) -> int:
        return self.new_columns.shape[1]


@dataclass
class BasisState:
    """Feature matrix F, orthonormal companion Q, and per-layer extents.

    Invariants: span(Q) = span(F), F's columns are linearly independent
    with second moment 1, and ``layer_ranges`` partitions the columns in
    construction order as half-open [start, stop) intervals.
    """

    F: np.ndarray
    Q: np.ndarray
    layer_ranges: list[tuple[int, int]]

    @property
    def m(self) -> int:
        return self.F.shape[0]

    @property
    def ncols(self) -> int:
        return self.F.shape[1]

    @property
    def layer1_cols(self) -> int:
        return self.layer_ranges[0][1]

    @property
    def depth(self) -> int:
        return len(self.layer_ranges)


def lift_input(X) -> np.ndarray:
    """Prepend the all-ones column: [1 X]."""
    X = check_matrix(X, "X")
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _scaled_projection(F1_tilde: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # fold the norm-sqrt(m) rescaling into the weights, then recompute the
    # columns from the scaled weights so B = F1_tilde @ W1 holds bit-exactly
    m = F1_tilde.shape[0]
    norms = np.linalg.norm(F1_tilde @ V, axis=0)
    keep = norms > 0
    W1 = V[:, keep] * (math.sqrt(m) / norms[keep])
    return F1_tilde @ W1, W1


def build_basis1_exact(F1_tilde) -> LayerBuildResult:
    """First layer: an independent spanning set for the lifted input.

    The right singular vectors of [1 X] give linear combinations whose
    values on the training rows are orthogonal; each is rescaled to norm
    √m. Rank deficiency (dependent input features) just drops columns.
    """
    F1_tilde = check_matrix(F1_tilde, "F1_tilde")
    svd = thin_svd(F1_tilde)
    B, W1 = _scaled_projection(F1_tilde, svd.V)
    return LayerBuildResult(new_columns=B, W1=W1)


def build_basis1_width(
    F1_tilde,
    gamma: int,
    svd_mode: str = "exact",
    seed: int = 0,
    oversample: int = 10,
    power_iters: int = 2,
) -> LayerBuildResult:
    """Width-limited first layer: top-``gamma`` singular directions only.

    ``svd_mode`` selects the exact factorization or the seeded randomized
    range finder (useful when d is large); either way at most
    min(gamma, rank) columns come back, normalized to norm √m.
    """
    F1_tilde = check_matrix(F1_tilde, "F1_tilde")
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    if svd_mode == "exact":
        svd = thin_svd(F1_tilde)
        V = svd.V[:, :gamma]
    elif svd_mode == "randomized":
        small = min(F1_tilde.shape)
        k = min(gamma, small)
        # keep the sketch within the matrix dimensions
        ov = min(oversample, small - k)
        svd = randomized_range_svd(F1_tilde, k, oversample=ov,
                                   power_iters=power_iters, seed=seed)
        V = svd.V
    else:
        raise ValueError(f"unknown svd_mode {svd_mode!r}")
    B, W1 = _scaled_projection(F1_tilde, V)
    return LayerBuildResult(new_columns=B, W1=W1)


def initial_state(layer1: LayerBuildResult, tol: float | None = None) -> BasisState:
    """Basis state holding exactly the first layer's columns."""
    B = layer1.new_columns
    m = B.shape[0]
    if tol is None:
        tol = default_tol(m)
    Q = np.zeros((m, 0))
    for j in range(B.shape[1]):
        c = B[:, j]
        r = residual(residual(c, Q), Q)
        nr = np.linalg.norm(r)
        if nr <= tol:
            raise ValueError("first-layer columns must be linearly independent")
        Q = np.hstack([Q, (r / nr)[:, None]])
    return BasisState(F=B.copy(), Q=Q, layer_ranges=[(0, B.shape[1])])


def candidate_column(state: BasisState, ref: CandidateRef) -> np.ndarray:
    """Hadamard product of the referenced columns; O(m) work and memory."""
    lo, hi = state.layer_ranges[-1]
    if not (0 <= ref.prev_col < hi - lo and 0 <= ref.first_col < state.layer1_cols):
        raise IndexError(f"candidate ref out of range: {ref}")
    return state.F[:, lo + ref.prev_col] * state.F[:, ref.first_col]


def _candidate_block(state: BasisState, prev: int) -> np.ndarray:
    # all products of one previous-layer column with every layer-1 column
    lo, _ = state.layer_ranges[-1]
    n1 = state.layer1_cols
    return state.F[:, lo + prev][:, None] * state.F[:, :n1]


def _commit_layer(state: BasisState, cols: list[np.ndarray]) -> None:
    start = state.ncols
    state.F = np.hstack([state.F] + [c[:, None] for c in cols])
    state.layer_ranges.append((start, state.ncols))


def build_basis_t_exact(state: BasisState, tol: float | None = None) -> LayerBuildResult:
    """Next layer, exact mode: admit every candidate that enlarges the span.

    Candidates are scanned in a fixed order (previous-layer index outer,
    layer-1 index inner) and accepted when their residual against the
    current Q has norm above ``tol``; Q grows as the scan proceeds, so
    later candidates are tested against earlier acceptances. A zero-width
    result means the span is saturated and construction can stop.

    Mutates ``state`` in place and also returns the added columns.
    """
    m = state.m
    if tol is None:
        tol = default_tol(m)
    lo, hi = state.layer_ranges[-1]
    sqrt_m = math.sqrt(m)
    Q = state.Q
    cols: list[np.ndarray] = []
    nodes: list[tuple[CandidateRef, float]] = []
    for prev in range(hi - lo):
        if Q.shape[1] == m:
            break  # span is all of R^m, nothing left to add
        block = _candidate_block(state, prev)
        for j in range(block.shape[1]):
            c = block[:, j]
            r = residual(residual(c, Q), Q)
            nr = np.linalg.norm(r)
            if nr > tol:
                w = sqrt_m / np.linalg.norm(c)
                cols.append(w * c)
                nodes.append((CandidateRef(prev, j), w))
                Q = np.hstack([Q, (r / nr)[:, None]])
                if Q.shape[1] == m:
                    break
    state.Q = Q
    if not cols:
        return LayerBuildResult(new_columns=np.zeros((m, 0)))
    _commit_layer(state, cols)
    return LayerBuildResult(new_columns=state.F[:, -len(cols):].copy(), nodes=nodes)


def build_basis_t_width(
    state: BasisState,
    V,
    gamma: int,
    b: int,
    tol: float | None = None,
) -> LayerBuildResult:
    """Next layer, width-limited: greedy target-driven candidate selection.

    Runs ceil(gamma / b) rounds. Each round scores every candidate whose
    residual against the current Q is numerically nonzero: the score is
    the norm of the projection of the unit residual onto the column space
    of the deflated target V, so candidates aligned with what the current
    features cannot yet express rank first. The top ``b`` by score are
    taken greedily, skipping any that became dependent on this round's
    earlier picks; then Q grows and V is deflated. Stops early once no
    eligible candidate remains; at most ``gamma`` columns total.

    Mutates ``state`` in place and also returns the added columns.
    """
    m = state.m
    if tol is None:
        tol = default_tol(m)
    if gamma < 1 or b < 1:
        raise ValueError("gamma and b must be at least 1")
    if b > gamma:
        raise ValueError("batch size b must not exceed gamma")
    V = check_matrix(V, "V")
    if V.shape[0] != m:
        raise ValueError("V must have one row per training instance")

    lo, hi = state.layer_ranges[-1]
    n_prev = hi - lo
    n1 = state.layer1_cols
    sqrt_m = math.sqrt(m)
    Q = state.Q
    Vd = residual(V, Q)

    cols: list[np.ndarray] = []
    nodes: list[tuple[CandidateRef, float]] = []
    rounds = -(-gamma // b)
    for _ in range(rounds):
        if len(cols) >= gamma:
            break
        O_V = thin_svd(Vd).U

        # score all candidates against the current Q and deflated target
        scores = np.full(n_prev * n1, -1.0)
        for prev in range(n_prev):
            block = _candidate_block(state, prev)
            R = block - Q @ (Q.T @ block)
            R -= Q @ (Q.T @ R)
            norms = np.linalg.norm(R, axis=0)
            ok = norms > tol
            if not ok.any():
                continue
            unit = R[:, ok] / norms[ok]
            if O_V.shape[1]:
                sc = np.linalg.norm(O_V.T @ unit, axis=0)
            else:
                sc = np.zeros(int(ok.sum()))
            scores[prev * n1 + np.flatnonzero(ok)] = sc

        # descending score; stable sort breaks ties by lowest candidate index
        order = np.argsort(-scores, kind="stable")
        quota = min(b, gamma - len(cols))
        picked = 0
        for flat in order:
            if picked == quota or scores[flat] < 0:
                break
            prev, j = divmod(int(flat), n1)
            c = state.F[:, lo + prev] * state.F[:, j]
            r = residual(residual(c, Q), Q)
            nr = np.linalg.norm(r)
            if nr <= tol:
                continue  # dependent on an earlier pick this round
            w = sqrt_m / np.linalg.norm(c)
            cols.append(w * c)
            nodes.append((CandidateRef(prev, j), w))
            Q = np.hstack([Q, (r / nr)[:, None]])
            picked += 1
        if picked == 0:
            break
        Vd = residual(Vd, Q)

    state.Q = Q
    if not cols:
        return LayerBuildResult(new_columns=np.zeros((m, 0)))
    _commit_layer(state, cols)
    return LayerBuildResult(new_columns=state.F[:, -len(cols):].copy(), nodes=nodes)
