"""Procedurally generated datasets for tests and desk-scale experiments.

Everything is seeded and deterministic. The rectangles task renders
outline rectangles into 28x28 binary images, labeled +1 when the
rectangle is taller than wide; width and height always differ, and all
generated images are pairwise distinct.
"""

from __future__ import annotations

import numpy as np

from .dataset import LabeledDataset, make_dataset


def random_regression(m: int, d: int, seed: int) -> LabeledDataset:
    """Gaussian inputs with independent Gaussian targets.

    Rows are distinct with probability 1; used for interpolation checks.
    """
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, d))
    y = rng.standard_normal(m)
    ds = make_dataset(X, y, task="regression")
    assert ds.distinct
    return ds


def random_quadratic_classification(m: int, d: int, seed: int) -> LabeledDataset:
    """Binary labels from the sign of a random quadratic, median-centered
    so the classes are balanced."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, d))
    A = rng.standard_normal((d, d)) / d
    b = rng.standard_normal(d)
    q = np.einsum("ij,jk,ik->i", X, A, X) + X @ b
    q = q - np.median(q)
    y = np.where(q >= 0, 1.0, -1.0)
    return make_dataset(X, y, task="binary")


def _render_outline(size: int, top: int, left: int, h: int, w: int) -> np.ndarray:
    img = np.zeros((size, size))
    img[top, left:left + w] = 1.0
    img[top + h - 1, left:left + w] = 1.0
    img[top:top + h, left] = 1.0
    img[top:top + h, left + w - 1] = 1.0
    return img


def rectangles(m: int, seed: int, size: int = 28, min_side: int = 3,
               min_gap: int = 1) -> LabeledDataset:
    """Outline-rectangle images labeled by their aspect: +1 iff taller
    than wide.

    ``min_gap`` is the smallest |height - width| allowed; raising it
    widens the margin of the concept. Parameter tuples are sampled
    without replacement, so rows are pairwise distinct.
    """
    rng = np.random.default_rng(seed)
    X = np.empty((m, size * size))
    y = np.empty(m)
    seen = set()
    i = 0
    while i < m:
        h = int(rng.integers(min_side, size + 1))
        w = int(rng.integers(min_side, size + 1))
        if abs(h - w) < min_gap:
            continue
        top = int(rng.integers(0, size - h + 1))
        left = int(rng.integers(0, size - w + 1))
        key = (top, left, h, w)
        if key in seen:
            continue
        seen.add(key)
        X[i] = _render_outline(size, top, left, h, w).ravel()
        y[i] = 1.0 if h > w else -1.0
        i += 1
    return make_dataset(X, y, task="binary")


def write_csv(ds: LabeledDataset, path) -> None:
    """Write a dataset in the CSV format the loader reads back."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(ds.m):
            label = ds.labels[i]
            lab = repr(int(label)) if float(label).is_integer() else repr(float(label))
            fh.write(lab + "," + ",".join(repr(float(v)) for v in ds.X[i]) + "\n")
