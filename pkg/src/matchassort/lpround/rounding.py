"""Independent and dependent (star-graph pipage) rounding of fractional menus."""

from __future__ import annotations

import numpy as np

from .._random import rng as make_rng
from ..core import AssortmentFamily, FractionalAssortment

SNAP = 1e-12


def _as_matrix(x) -> np.ndarray:
    return np.asarray(x.x if isinstance(x, FractionalAssortment) else x, dtype=float)


def independent_round_rows(x: np.ndarray, gen: np.random.Generator, trials: int | None = None) -> np.ndarray:
    """Boolean draws with ``P(out[..., i, j]) = x[i, j]``; leading axis ``trials`` if given."""
    x = np.asarray(x, dtype=float)
    shape = x.shape if trials is None else (trials,) + x.shape
    return gen.random(shape) < x


def independent_round(x: FractionalAssortment | np.ndarray, seed: int) -> AssortmentFamily:
    return AssortmentFamily.from_indicator(independent_round_rows(_as_matrix(x), make_rng(seed)))


def dependent_round_rows(X: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Round every row of ``X`` independently with the star-graph dependent scheme.

    Per row: while two or more coordinates are fractional, take the two
    lowest-indexed ones ``a < b`` and either move ``(+eps, -eps)`` with
    probability ``delta / (eps + delta)`` or ``(-delta, +delta)`` otherwise,
    where ``eps`` and ``delta`` are the largest steps keeping both in
    ``[0, 1]``. Each move makes at least one of them integral and keeps the
    row sum and every marginal in expectation. A last lone fractional
    coordinate is rounded up with probability equal to its value.

    One uniform per row is consumed per round, so rows are reproducible for
    a fixed generator state and batch shape.
    """
    X = np.array(X, dtype=float, copy=True)
    if X.ndim != 2:
        raise ValueError("expected a 2-D array of rows")
    B, m = X.shape
    rows = np.arange(B)
    for _ in range(m + 1):
        X[X < SNAP] = 0.0
        X[X > 1 - SNAP] = 1.0
        frac = (X > 0) & (X < 1)
        count = frac.sum(axis=1)
        if not count.any():
            break
        u = gen.random(B)
        a = np.argmax(frac, axis=1)
        rest = frac.copy()
        rest[rows, a] = False
        b = np.argmax(rest, axis=1)

        pair = count >= 2
        xa, xb = X[rows, a], X[rows, b]
        eps = np.minimum(1 - xa, xb)
        delta = np.minimum(xa, 1 - xb)
        up = u * (eps + delta) < delta  # probability delta / (eps + delta)
        step = np.where(up, eps, -delta)
        X[rows[pair], a[pair]] = xa[pair] + step[pair]
        X[rows[pair], b[pair]] = xb[pair] - step[pair]

        lone = count == 1
        X[rows[lone], a[lone]] = (u[lone] < xa[lone]).astype(float)
    return X > 0.5


def dependent_round_star(x_row, seed: int) -> np.ndarray:
    """Dependent rounding of a single fractional row; returns a 0/1 integer vector."""
    row = np.asarray(x_row, dtype=float)[None, :]
    return dependent_round_rows(row, make_rng(seed))[0].astype(int)


def dependent_round(x: FractionalAssortment | np.ndarray, seed: int) -> AssortmentFamily:
    """Every consumer row rounded independently by the dependent scheme."""
    return AssortmentFamily.from_indicator(dependent_round_rows(_as_matrix(x), make_rng(seed)))
