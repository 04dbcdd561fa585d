"""LP relaxations of the MNL assortment problem after the Charnes-Cooper substitution.

Variables are laid out as ``y`` (row-major ``n x m``), then ``w`` (``n``),
then ``z`` (``m``).
"""

from __future__ import annotations

import warnings

import numpy as np

from ..core import FractionalAssortment, Instance
from .simplex import LinearProgram, LpSolution


def _layout(n: int, m: int):
    ny = n * m
    return ny, ny + n, ny + n + m  # end of y, end of w, total


def _names(n: int, m: int) -> tuple[str, ...]:
    return (tuple(f"y_{i + 1}_{j + 1}" for i in range(n) for j in range(m))
            + tuple(f"w_{i + 1}" for i in range(n))
            + tuple(f"z_{j + 1}" for j in range(m)))


def build_lp_unconstrained(instance: Instance) -> LinearProgram:
    """``max r.z`` s.t. ``z_j <= sum_i v_ij y_ij``, ``w_i + sum_j v_ij y_ij = 1``, ``0 <= y_ij <= w_i``, ``0 <= z <= 1``."""
    n, m = instance.n, instance.m
    v = instance.consumer_scores() if n else np.zeros((0, m))
    ey, ew, nv = _layout(n, m)
    c = np.zeros(nv)
    c[ew:] = instance.r()

    A_eq = np.zeros((n, nv))
    for i in range(n):
        A_eq[i, i * m:(i + 1) * m] = v[i]
        A_eq[i, ey + i] = 1.0
    b_eq = np.ones(n)

    A_ub = np.zeros((m + n * m, nv))
    for j in range(m):
        A_ub[j, ew + j] = 1.0
        A_ub[j, j:ey:m] = -v[:, j]
    for i in range(n):
        for j in range(m):
            row = m + i * m + j
            A_ub[row, i * m + j] = 1.0
            A_ub[row, ey + i] = -1.0
    b_ub = np.zeros(len(A_ub))

    lo = np.zeros(nv)
    hi = np.full(nv, np.inf)  # y <= w <= 1 are implied by the rows
    hi[ew:] = 1.0
    return LinearProgram(c, A_eq, b_eq, A_ub, b_ub, lo, hi, _names(n, m))


def build_lp_cardinality(instance: Instance) -> LinearProgram:
    """The unconstrained LP plus ``sum_j y_ij <= K_i w_i`` for every consumer."""
    if instance.budgets is None:
        raise ValueError("budgets missing")
    base = build_lp_unconstrained(instance)
    n, m = instance.n, instance.m
    ey, _, nv = _layout(n, m)
    extra = np.zeros((n, nv))
    for i in range(n):
        extra[i, i * m:(i + 1) * m] = 1.0
        extra[i, ey + i] = -float(instance.budgets[i])
    return LinearProgram(base.objective, base.A_eq, base.b_eq,
                         np.vstack([base.A_ub, extra]), np.concatenate([base.b_ub, np.zeros(n)]),
                         base.lo, base.hi, base.variable_names)


def split_solution(x: np.ndarray, n: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ey, ew, _ = _layout(n, m)
    return x[:ey].reshape(n, m), x[ey:ew], x[ew:]


def recover_fractional(sol: LpSolution, instance: Instance) -> FractionalAssortment:
    """``x_ij = y_ij / w_i`` clamped to ``[0, 1]``; rows with vanishing ``w_i`` become zero."""
    n, m = instance.n, instance.m
    y, w, _ = split_solution(np.asarray(sol.x, dtype=float), n, m)
    x = np.zeros((n, m))
    for i in range(n):
        if w[i] < 1e-12:
            warnings.warn(f"w[{i}] vanishes; consumer {i} gets an empty fractional menu")
            continue
        x[i] = np.clip(y[i] / w[i], 0.0, 1.0)
    return FractionalAssortment(x)


def embed_family(instance: Instance, family) -> np.ndarray:
    """LP point induced by an integral family: ``y = x/(1+v.x)``, ``w = 1/(1+v.x)``, ``z = min(1, sum_i v y)``."""
    n, m = instance.n, instance.m
    v = instance.consumer_scores()
    x = np.zeros((n, m))
    for i, menu in enumerate(family.menus):
        x[i, list(menu)] = 1.0
    w = 1.0 / (1.0 + (v * x).sum(axis=1))
    y = x * w[:, None]
    z = np.minimum(1.0, (v * y).sum(axis=0))
    return np.concatenate([y.ravel(), w, z])
