"""Brute-force polynomial references for validating the construction.

Everything here favors transparency over speed: monomials are enumerated
explicitly, spans are compared by numerical rank, and a second route via
a Gram-matrix eigendecomposition is kept so the two sides of a test do
not have to share a factorization code path.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .linalg import check_matrix, thin_svd

# Enumerating C(d + t, t) monomials above this is a sign of a misuse, not a
# legitimate oracle call.
MAX_MONOMIALS = 100_000


def monomial_count(dim: int, degree: int) -> int:
    """Number of monomials in ``dim`` variables of total degree <= ``degree``."""
    if dim < 1 or degree < 0:
        raise ValueError("need dim >= 1 and degree >= 0")
    return math.comb(dim + degree, degree)


def monomial_exponents(dim: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of all monomials with total degree <= ``degree``.

    Ordered by total degree, then by the index combination that produced
    them, so for dim=2, degree=2 the order is
    1, x1, x2, x1^2, x1*x2, x2^2.
    """
    if monomial_count(dim, degree) > MAX_MONOMIALS:
        raise ValueError(
            f"{monomial_count(dim, degree)} monomials exceed the "
            f"{MAX_MONOMIALS} oracle limit (dim={dim}, degree={degree})"
        )
    out: list[tuple[int, ...]] = []
    for k in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), k):
            e = [0] * dim
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def monomial_matrix(X, degree: int) -> np.ndarray:
    """Evaluate every monomial of total degree <= ``degree`` on the rows of X.

    Returns an m x C(d + degree, degree) matrix whose columns follow the
    order of :func:`monomial_exponents`.
    """
    X = check_matrix(X, "X")
    m, d = X.shape
    exps = monomial_exponents(d, degree)
    M = np.empty((m, len(exps)))
    for j, e in enumerate(exps):
        col = np.ones(m)
        for i, p in enumerate(e):
            if p:
                col = col * X[:, i] ** p
        M[:, j] = col
    return M


def span_rank(A, tol: float | None = None) -> int:
    """Numerical rank of ``A`` under the package-wide singular value cutoff.

    ``tol`` is relative to the largest singular value; None uses the same
    default as the construction, so the two never disagree on a rank.
    """
    return thin_svd(A, tol).rank


def span_equal(A, B, tol: float | None = None) -> bool:
    """True when the column spans of ``A`` and ``B`` coincide.

    Decided by rank(A) = rank(B) = rank([A B]) at the given relative
    tolerance.
    """
    A = check_matrix(A, "A")
    B = check_matrix(B, "B")
    if A.shape[0] != B.shape[0]:
        raise ValueError("A and B must have the same number of rows")
    ra = span_rank(A, tol)
    rb = span_rank(B, tol)
    return ra == rb == span_rank(np.hstack([A, B]), tol)


def _orthonormal_basis(A: np.ndarray) -> tuple[np.ndarray, float]:
    """Orthonormal basis of the column span via eigh of the Gram matrix.

    Returns the basis and the largest singular value of ``A``.
    """
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0)), 0.0
    G = A.T @ A
    w, V = np.linalg.eigh(G)
    w = np.clip(w, 0.0, None)
    smax = math.sqrt(float(w[-1])) if w.size else 0.0
    if smax == 0.0:
        return np.zeros((A.shape[0], 0)), 0.0
    cut = (max(A.shape) * np.finfo(np.float64).eps * smax) ** 2
    keep = w > cut
    Q = (A @ V[:, keep]) / np.sqrt(w[keep])
    # one refinement pass; eigh of an ill-conditioned Gram matrix loses
    # about half the digits otherwise
    Q, _ = np.linalg.qr(Q)
    return Q, smax


def gram_span_contains(A, B, tol: float = 1e-8) -> bool:
    """True when every column of ``B`` lies in the column span of ``A``.

    Independent route for cross-checking :func:`span_equal`: the basis of
    span(A) comes from an eigendecomposition of the Gram matrix, not an
    SVD. A column b passes if its residual off span(A) has norm at most
    ``tol * smax`` where smax is the largest singular value of [A | B].
    """
    A = check_matrix(A, "A")
    B = check_matrix(B, "B")
    if A.shape[0] != B.shape[0]:
        raise ValueError("A and B must have the same number of rows")
    Q, _ = _orthonormal_basis(A)
    _, scale = _orthonormal_basis(np.hstack([A, B]))
    if scale == 0.0:
        return True
    R = B - Q @ (Q.T @ B)
    return bool(np.linalg.norm(R, axis=0).max(initial=0.0) <= tol * scale)
