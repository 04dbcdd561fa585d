"""Concave relaxations for MNL suppliers solved by Frank-Wolfe.

After the Charnes-Cooper substitution the feasible region is, per consumer,
``{y >= 0 : y_j <= w, sum_j y_j <= K w}`` with ``w = 1 - v.y``. Its vertices
are the images ``x / (1 + v.x)`` of 0/1 menus ``x`` with ``|x| <= K``, so the
linear maximization step is a small MNL assortment problem, solved exactly by
Dinkelbach iterations. An LP-based step is available for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .choice import MnlModel, UniformModel
from .core import AssortmentFamily, FractionalAssortment, Instance
from .evaluate import pick_matrix
from .lpround.rounding import dependent_round, independent_round
from .lpround.simplex import OPTIMAL, LinearProgram, solve_lp


def _supplier_weights(instance: Instance) -> tuple[np.ndarray, np.ndarray]:
    for j, mdl in enumerate(instance.supplier_models):
        if not isinstance(mdl, (MnlModel, UniformModel)):
            raise ValueError(f"supplier {j} is not MNL")
    return instance.supplier_scores()


def eq12_upper_bound(instance: Instance, family: AssortmentFamily) -> float:
    """``sum_j r_j T_j / (u_j0 + T_j)`` with ``T_j`` the expected MNL weight of supplier ``j``'s requests.

    Supplier demand is concave in the requesting weight, so by Jensen this
    dominates the exact expected revenue of ``family``.
    """
    u, u0 = _supplier_weights(instance)
    P = pick_matrix(instance, family)
    T = (u.T * P).sum(axis=0)
    ratio = np.zeros_like(T)
    np.divide(T, T + u0, out=ratio, where=T > 0)
    return float(instance.r() @ ratio)


@dataclass(frozen=True, eq=False)
class ConcaveProgram:
    """``max sum_j r_j z_j / (z_j + u_j0)`` with ``z_j = sum_i u_ji v_ij y_ij`` over the MNL polytope."""

    v: np.ndarray  # (n, m) consumer scores, outside weight 1
    u: np.ndarray  # (m, n) supplier weights
    u0: np.ndarray  # (m,)
    r: np.ndarray  # (m,)
    budgets: np.ndarray | None = None  # (n,) or None

    def __post_init__(self):
        if np.any(np.asarray(self.u0) <= 0):
            raise ValueError("supplier outside weights must be positive")

    @classmethod
    def from_instance(cls, instance: Instance, budgeted: bool = False) -> "ConcaveProgram":
        u, u0 = _supplier_weights(instance)
        budgets = None
        if budgeted:
            if instance.budgets is None:
                raise ValueError("budgets missing")
            budgets = np.asarray(instance.budgets, dtype=int)
        return cls(instance.consumer_scores(), u, u0, instance.r(), budgets)

    @property
    def shape(self) -> tuple[int, int]:
        return self.v.shape

    def weight(self) -> np.ndarray:
        """``W[i, j] = u_ji v_ij`` so that ``z = (W * y).sum(0)``."""
        return self.u.T * self.v

    def value(self, y: np.ndarray) -> float:
        z = (self.weight() * y).sum(axis=0)
        return float(self.r @ (z / (z + self.u0)))

    def gradient(self, y: np.ndarray) -> np.ndarray:
        z = (self.weight() * y).sum(axis=0)
        return self.weight() * (self.r * self.u0 / (z + self.u0) ** 2)

    def w_of(self, y: np.ndarray) -> np.ndarray:
        return 1.0 - (self.v * y).sum(axis=1)

    def cap(self, i: int) -> int:
        m = self.shape[1]
        return m if self.budgets is None else int(min(self.budgets[i], m))


def lmo_exact(g: np.ndarray, v: np.ndarray, caps: np.ndarray) -> np.ndarray:
    """Vertex ``s`` maximizing ``<g, s>`` over the per-consumer polytopes.

    Per row this maximizes ``sum_S g / (1 + sum_S v)`` over menus of size at
    most ``cap``: Dinkelbach on ``lam`` with the top-``cap`` positive entries
    of ``g - lam v``, vectorized over rows.
    """
    n, m = g.shape
    lam = np.zeros(n)
    best_x = np.zeros((n, m), dtype=bool)
    best_val = np.zeros(n)
    active = np.ones(n, dtype=bool)
    rank = np.arange(m)[None, :]
    for _ in range(m + 2):
        score = g - lam[:, None] * v
        order = np.argsort(-score, axis=1, kind="stable")
        sorted_score = np.take_along_axis(score, order, axis=1)
        keep = (sorted_score > 0) & (rank < caps[:, None])
        x = np.zeros((n, m), dtype=bool)
        np.put_along_axis(x, order, keep, axis=1)
        val = (g * x).sum(axis=1) / (1 + (v * x).sum(axis=1))
        better = active & (val > best_val + 1e-15)
        best_x[better] = x[better]
        best_val[better] = val[better]
        active = better
        if not active.any():
            break
        lam = np.where(better, val, lam)
    return best_x / (1 + (v * best_x).sum(axis=1))[:, None]


def lmo_lp(prog: ConcaveProgram, g: np.ndarray) -> np.ndarray:
    """Same step as :func:`lmo_exact` through the simplex solver."""
    n, m = prog.shape
    nv = n * m + n
    c = np.zeros(nv)
    c[:n * m] = g.ravel()
    A_eq = np.zeros((n, nv))
    A_ub = []
    for i in range(n):
        A_eq[i, i * m:(i + 1) * m] = prog.v[i]
        A_eq[i, n * m + i] = 1.0
        for j in range(m):
            row = np.zeros(nv)
            row[i * m + j] = 1.0
            row[n * m + i] = -1.0
            A_ub.append(row)
        if prog.budgets is not None:
            row = np.zeros(nv)
            row[i * m:(i + 1) * m] = 1.0
            row[n * m + i] = -prog.cap(i)
            A_ub.append(row)
    A_ub = np.asarray(A_ub).reshape(-1, nv)
    lp = LinearProgram(c, A_eq, np.ones(n), A_ub, np.zeros(len(A_ub)), np.zeros(nv), np.full(nv, np.inf))
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"linear subproblem failed: {sol.status}")
    return np.maximum(sol.x[:n * m].reshape(n, m), 0.0)


@dataclass(frozen=True)
class FwConfig:
    max_iters: int = 500
    tol: float = 1e-6
    lmo: str = "exact"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.lmo not in ("exact", "lp"):
            raise ValueError(f"unknown lmo {self.lmo!r}")


@dataclass(frozen=True, eq=False)
class FwResult:
    y: np.ndarray
    w: np.ndarray
    value: float
    upper_bound: float  # min over iterations of f(y_t) + gap_t
    gaps: tuple[float, ...] = field(default=())
    iterations: int = 0

    def fractional(self) -> FractionalAssortment:
        x = np.zeros_like(self.y)
        ok = self.w > 1e-12
        x[ok] = np.clip(self.y[ok] / self.w[ok, None], 0.0, 1.0)
        return FractionalAssortment(x)


def frank_wolfe(prog: ConcaveProgram, cfg: FwConfig = FwConfig()) -> FwResult:
    """Conditional gradient with step ``2/(t+2)`` from ``y = 0``; returns the best iterate."""
    n, m = prog.shape
    caps = np.array([prog.cap(i) for i in range(n)], dtype=int)
    y = np.zeros((n, m))
    best_y, best_val = y.copy(), prog.value(y)
    bound = np.inf
    gaps = []
    t = 0
    for t in range(cfg.max_iters):
        g = prog.gradient(y)
        s = lmo_exact(g, prog.v, caps) if cfg.lmo == "exact" else lmo_lp(prog, g)
        gap = float((g * (s - y)).sum())
        val = prog.value(y)
        gaps.append(gap)
        bound = min(bound, val + max(gap, 0.0))
        if val > best_val:
            best_y, best_val = y.copy(), val
        if gap <= cfg.tol:
            break
        y = y + 2.0 / (t + 2) * (s - y)
    else:
        val = prog.value(y)
        if val > best_val:
            best_y, best_val = y.copy(), val
    return FwResult(best_y, prog.w_of(best_y), best_val, float(max(bound, best_val)), tuple(gaps), t + 1)


def algorithm4(instance: Instance, cfg: FwConfig = FwConfig(), seed: int = 0,
               result: FwResult | None = None) -> AssortmentFamily:
    """Frank-Wolfe on the unconstrained program, then independent rounding of ``y / w``."""
    res = result or frank_wolfe(ConcaveProgram.from_instance(instance), cfg)
    return independent_round(res.fractional(), seed)


def algorithm5(instance: Instance, cfg: FwConfig = FwConfig(), seed: int = 0,
               result: FwResult | None = None) -> AssortmentFamily:
    """Frank-Wolfe on the budgeted program, then dependent rounding per consumer."""
    if instance.budgets is None:
        raise ValueError("budgets missing")
    res = result or frank_wolfe(ConcaveProgram.from_instance(instance, budgeted=True), cfg)
    return dependent_round(res.fractional(), seed)
