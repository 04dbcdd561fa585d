"""Dense two-phase revised simplex.

Pricing is Dantzig's largest-violation rule; after a run of degenerate pivots
it switches to Bland's smallest-index rule (entering and leaving) until the
objective moves again, which rules out cycling. ``rule="bland"`` uses Bland's
rule throughout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = "optimal", "infeasible", "unbounded", "iteration_limit"

_PIVOT_TOL = 1e-9
_REFACTOR_EVERY = 200
_DEGENERATE_RUN = 20


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``max c.x`` s.t. ``A_eq x = b_eq``, ``A_ub x <= b_ub``, ``lo <= x <= hi``."""

    objective: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    variable_names: tuple[str, ...] = ()

    def __post_init__(self):
        nv = len(self.objective)
        for name in ("objective", "b_eq", "b_ub", "lo", "hi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        for name in ("A_eq", "A_ub"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a.reshape(-1, nv) if a.size else np.zeros((0, nv)))
        if self.A_eq.shape[0] != len(self.b_eq) or self.A_ub.shape[0] != len(self.b_ub):
            raise ValueError("row count mismatch")
        if len(self.lo) != nv or len(self.hi) != nv or np.any(self.lo > self.hi):
            raise ValueError("bad bounds")
        if not self.variable_names:
            object.__setattr__(self, "variable_names", tuple(f"x{k}" for k in range(nv)))

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def residuals(self, x: np.ndarray) -> float:
        """Largest violation of any constraint or bound at ``x``."""
        viol = [0.0]
        if len(self.b_eq):
            viol.append(np.abs(self.A_eq @ x - self.b_eq).max())
        if len(self.b_ub):
            viol.append((self.A_ub @ x - self.b_ub).max())
        viol.append((self.lo - x).max())
        viol.append((x - self.hi).max())
        return float(max(viol))

    def to_text(self) -> str:
        names = self.variable_names

        def terms(row):
            return " ".join(f"{a:+.17g} {names[k]}" for k, a in enumerate(row) if a != 0) or "0"

        lines = [f"max {terms(self.objective)}"]
        lines += [f"{terms(a)} = {b:.17g}" for a, b in zip(self.A_eq, self.b_eq)]
        lines += [f"{terms(a)} <= {b:.17g}" for a, b in zip(self.A_ub, self.b_ub)]
        lines += [f"{lo:.17g} <= {names[k]} <= {hi:.17g}"
                  for k, (lo, hi) in enumerate(zip(self.lo, self.hi))]
        return "\n".join(lines) + "\n"

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


@dataclass(frozen=True, eq=False)
class LpSolution:
    x: np.ndarray
    value: float
    status: str
    iterations: int = 0
    residual: float = 0.0
    min_reduced_cost: float = 0.0


@dataclass
class _Standard:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray  # minimization costs
    basis: np.ndarray  # initial basis (slack or artificial per row)
    n_struct: int  # columns before artificials
    # reconstruction: x_orig = offset + M @ x_std[:n_cols_map]
    offset: np.ndarray = field(default=None)
    M: np.ndarray = field(default=None)


def _standardize(lp: LinearProgram) -> _Standard:
    nv = lp.num_vars
    cols = []  # (orig index, sign)
    offset = np.zeros(nv)
    upper_rows = []
    for k in range(nv):
        lo, hi = lp.lo[k], lp.hi[k]
        if np.isfinite(lo):
            offset[k] = lo
            cols.append((k, 1.0))
            if np.isfinite(hi):
                upper_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[k] = hi
            cols.append((k, -1.0))
        else:
            cols.append((k, 1.0))
            cols.append((k, -1.0))
    nc = len(cols)
    M = np.zeros((nv, nc))
    for c_idx, (k, s) in enumerate(cols):
        M[k, c_idx] = s
    c = -(lp.objective @ M)

    A_eq = lp.A_eq @ M
    b_eq = lp.b_eq - lp.A_eq @ offset
    A_ub = lp.A_ub @ M
    b_ub = lp.b_ub - lp.A_ub @ offset
    if upper_rows:
        U = np.zeros((len(upper_rows), nc))
        for r, (c_idx, cap) in enumerate(upper_rows):
            U[r, c_idx] = 1.0
        A_ub = np.vstack([A_ub, U])
        b_ub = np.concatenate([b_ub, [cap for _, cap in upper_rows]])

    p, q = A_eq.shape[0], A_ub.shape[0]
    rows = p + q
    A = np.zeros((rows, nc + q))
    A[:p, :nc] = A_eq
    A[p:, :nc] = A_ub
    A[p:, nc:] = np.eye(q)
    b = np.concatenate([b_eq, b_ub])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    basis = np.full(rows, -1)
    for r in range(q):
        if not neg[p + r]:
            basis[p + r] = nc + r
    need = np.flatnonzero(basis < 0)
    n_struct = nc + q
    if len(need):
        art = np.zeros((rows, len(need)))
        art[need, np.arange(len(need))] = 1.0
        A = np.hstack([A, art])
        basis[need] = n_struct + np.arange(len(need))
    c_full = np.concatenate([c, np.zeros(A.shape[1] - nc)])
    return _Standard(A, b, c_full, basis, n_struct, offset, M)


class _Tableau:
    """Revised simplex state: basis, explicit basis inverse, basic values."""

    def __init__(self, A, b, basis):
        self.A, self.b = A, b
        self.basis = basis.copy()
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < 1e-13] = 0.0

    def pivot(self, r, q, u):
        piv = self.Binv[r] / u[r]
        nz = np.flatnonzero(u)  # pivot columns are sparse; touch only affected rows
        self.Binv[nz] -= np.outer(u[nz], piv)
        self.Binv[r] = piv
        self.basis[r] = q

    def column(self, q):
        col = self.A[:, q]
        nz = np.flatnonzero(col)
        return self.Binv[:, nz] @ col[nz]

    def run(self, c, allowed, rule, max_iter):
        """Minimize ``c.x`` over columns flagged in ``allowed``. Returns (status, iterations)."""
        cols = np.flatnonzero(allowed)
        Ac = np.ascontiguousarray(self.A[:, cols])
        cc = c[cols]
        it = 0
        degenerate = 0
        since_refactor = 0
        is_basic = np.zeros(self.A.shape[1], bool)
        while it < max_iter:
            is_basic[:] = False
            is_basic[self.basis] = True
            y = c[self.basis] @ self.Binv
            d = cc - y @ Ac
            d[is_basic[cols]] = 0.0
            neg = np.flatnonzero(d < -_PIVOT_TOL)
            if len(neg) == 0:
                return OPTIMAL, it
            bland = rule == "bland" or degenerate >= _DEGENERATE_RUN
            q = cols[neg[0]] if bland else cols[neg[np.argmin(d[neg])]]
            u = self.column(q)
            pos = np.flatnonzero(u > _PIVOT_TOL)
            if len(pos) == 0:
                return UNBOUNDED, it
            ratios = np.maximum(self.xB[pos], 0.0) / u[pos]
            theta = ratios.min()
            ties = pos[ratios <= theta + 1e-12]
            r = ties[np.argmin(self.basis[ties])]
            theta = max(self.xB[r], 0.0) / u[r]
            self.xB -= theta * u
            self.xB[r] = theta
            self.pivot(r, q, u)
            degenerate = degenerate + 1 if theta <= 1e-12 else 0
            it += 1
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0
        return ITERATION_LIMIT, it


def solve_lp(lp: LinearProgram, tol: float = 1e-7, rule: str = "dantzig",
             method: str = "simplex", max_iter: int | None = None) -> LpSolution:
    """Optimal basic solution of ``lp``.

    ``method="highs"`` delegates to scipy's HiGHS instead of the in-repo simplex.
    """
    if method == "highs":
        return _solve_highs(lp, tol)
    if method != "simplex":
        raise ValueError(f"unknown LP method {method!r}")
    std = _standardize(lp)
    rows, ncols = std.A.shape
    if rows == 0:
        x_std = np.zeros(ncols)
        if np.any(std.c < -_PIVOT_TOL):
            return LpSolution(std.offset.copy(), float("nan"), UNBOUNDED)
        x = std.offset + std.M @ x_std[:std.M.shape[1]]
        return LpSolution(x, float(lp.objective @ x), OPTIMAL)
    max_iter = max_iter or 50 * (rows + ncols)
    tab = _Tableau(std.A, std.b, std.basis)
    art = np.arange(std.n_struct, ncols)
    iters = 0
    if len(art):
        c1 = np.zeros(ncols)
        c1[art] = 1.0
        status, k = tab.run(c1, np.ones(ncols, bool), rule, max_iter)
        iters += k
        tab.refactor()
        infeas = float(c1[tab.basis] @ tab.xB)
        if status == ITERATION_LIMIT:
            return LpSolution(np.full(lp.num_vars, np.nan), float("nan"), ITERATION_LIMIT, iters)
        if infeas > tol:
            return LpSolution(np.full(lp.num_vars, np.nan), float("nan"), INFEASIBLE, iters)
        _drive_out_artificials(tab, std.n_struct)
    allowed = np.zeros(ncols, bool)
    allowed[:std.n_struct] = True
    status, k = tab.run(std.c, allowed, rule, max_iter)
    iters += k
    tab.refactor()
    if status != OPTIMAL:
        return LpSolution(np.full(lp.num_vars, np.nan), float("nan"), status, iters)
    x_std = np.zeros(ncols)
    x_std[tab.basis] = np.maximum(tab.xB, 0.0)
    x = std.offset + std.M @ x_std[:std.M.shape[1]]
    y = std.c[tab.basis] @ tab.Binv
    d = std.c[:std.n_struct] - y @ std.A[:, :std.n_struct]
    min_d = float(d.min()) if len(d) else 0.0
    residual = lp.residuals(x)
    if residual > tol or min_d < -tol:
        log.warning("simplex certificate weak: residual %.2e, min reduced cost %.2e", residual, min_d)
    return LpSolution(x, float(lp.objective @ x), OPTIMAL, iters, residual, min_d)


def _drive_out_artificials(tab: _Tableau, n_struct: int) -> None:
    """Pivot zero-level artificials out of the basis where a structural column allows it.

    Artificials left behind sit on redundant rows: their tableau row is zero
    on every structural column, so they stay at zero through phase 2.
    """
    for r in range(len(tab.basis)):
        if tab.basis[r] < n_struct:
            continue
        row = tab.Binv[r] @ tab.A[:, :n_struct]
        row[tab.basis[tab.basis < n_struct]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-7)
        if len(cand) == 0:
            continue
        q = cand[np.argmax(np.abs(row[cand]))]
        tab.pivot(r, q, tab.column(q))
    tab.refactor()


def _solve_highs(lp: LinearProgram, tol: float) -> LpSolution:
    from scipy.optimize import linprog

    kw = dict(A_ub=lp.A_ub if len(lp.b_ub) else None, b_ub=lp.b_ub if len(lp.b_ub) else None,
              A_eq=lp.A_eq if len(lp.b_eq) else None, b_eq=lp.b_eq if len(lp.b_eq) else None,
              bounds=list(zip(np.where(np.isfinite(lp.lo), lp.lo, None),
                              np.where(np.isfinite(lp.hi), lp.hi, None))),
              method="highs")
    res = linprog(-lp.objective, **kw)
    if res.status in (2, 4):
        # HiGHS presolve can label unbounded models infeasible; the plain solve tells them apart
        res = linprog(-lp.objective, options={"presolve": False}, **kw)
    status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status, ITERATION_LIMIT)
    if status != OPTIMAL:
        return LpSolution(np.full(lp.num_vars, np.nan), float("nan"), status)
    x = np.asarray(res.x)
    return LpSolution(x, float(lp.objective @ x), OPTIMAL, int(res.nit), lp.residuals(x))
