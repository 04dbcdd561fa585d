"""Expected matching revenue: exact evaluation, Monte Carlo, bounds and oracles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._random import trial_uniforms
from .choice import ChoiceModel, _all_masks
from .core import AssortmentFamily, EvalResult, Instance, feasible_menus

# Subset enumeration is 2**support work per supplier.
MAX_ENUM_SUPPORT = 20
# Partition DP is 3**n per supplier.
MAX_PARTITION_N = 12
MAX_PARTITION_M = 6
DEFAULT_BRUTE_CAP = 300_000
_CHUNK = 1 << 14


class ExactInfeasible(ValueError):
    """No exact evaluation path applies; fall back to Monte Carlo."""


class NoExactPath(ValueError):
    pass


def pick_matrix(instance: Instance, family: AssortmentFamily) -> np.ndarray:
    """``P[i, j] = p_ij(S_i)`` when ``j`` is offered to ``i``, else 0."""
    P = np.zeros((instance.n, instance.m))
    for i, (mdl, menu) in enumerate(zip(instance.consumer_models, family.menus)):
        if menu:
            probs, _ = mdl.menu_probs(menu)
            P[i, list(menu)] = probs
    return P


def poisson_binomial_pmf(probs) -> np.ndarray:
    """Distribution of the number of successes among independent Bernoulli trials."""
    pmf = np.array([1.0])
    for p in probs:
        nxt = np.zeros(len(pmf) + 1)
        nxt[:-1] = pmf * (1 - p)
        nxt[1:] += pmf * p
        pmf = nxt
    return pmf


def multilinear_table(table: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Expectation of a set function given by its value table under independent inclusion.

    ``table[b]`` is the value on the subset encoded by bitmask ``b`` of ``k``
    elements; ``probs`` has shape ``(F, k)``. Returns ``(F,)``. Elements are
    integrated out from the highest bit down.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    k = probs.shape[1]
    cur = np.broadcast_to(np.asarray(table, dtype=float), (probs.shape[0], 1 << k))
    for b in range(k - 1, -1, -1):
        half = 1 << b
        p = probs[:, b:b + 1]
        cur = (1 - p) * cur[:, :half] + p * cur[:, half:2 * half]
    return cur[:, 0]


def _subset_demand(model: ChoiceModel, support: np.ndarray, n: int) -> np.ndarray:
    """Demand on every subset of ``support``, indexed by bitmask over support positions."""
    k = len(support)
    out = np.empty(1 << k)
    step = 1 << 16
    for lo in range(0, 1 << k, step):
        codes = np.arange(lo, min(lo + step, 1 << k), dtype=np.int64)
        sub = ((codes[:, None] >> np.arange(k)) & 1).astype(bool)
        masks = np.zeros((len(codes), n), dtype=bool)
        masks[:, support] = sub
        out[lo:lo + len(codes)] = model.demand_masks(masks)
    return out


def supplier_expected_demand(model: ChoiceModel, p: np.ndarray, n: int,
                             max_enum: int = MAX_ENUM_SUPPORT) -> float:
    """E[Q(A)] where consumer ``i`` joins ``A`` independently with probability ``p[i]``."""
    support = np.flatnonzero(p > 0)
    if len(support) == 0:
        return 0.0
    if model.size_only:
        pmf = poisson_binomial_pmf(p[support])
        return float(pmf @ model.demand_by_size(np.arange(len(pmf))))
    if len(support) <= max_enum:
        table = _subset_demand(model, support, n)
        return float(multilinear_table(table, p[support][None, :])[0])
    raise ExactInfeasible(f"exact infeasible: support of size {len(support)}")


def expected_revenue_exact(instance: Instance, family: AssortmentFamily,
                           max_enum: int = MAX_ENUM_SUPPORT) -> EvalResult:
    P = pick_matrix(instance, family)
    per = []
    for j, (mdl, r) in enumerate(zip(instance.supplier_models, instance.revenues)):
        per.append(r * supplier_expected_demand(mdl, P[:, j], instance.n, max_enum))
    return EvalResult(float(sum(per)), tuple(float(v) for v in per))


def evaluate(instance: Instance, family: AssortmentFamily, trials: int = 1000,
             seed: int = 0, max_enum: int = MAX_ENUM_SUPPORT) -> EvalResult:
    """Exact when some exact path applies, Monte Carlo otherwise."""
    try:
        return expected_revenue_exact(instance, family, max_enum)
    except ExactInfeasible:
        return simulate(instance, family, trials, seed)


def simulate(instance: Instance, family: AssortmentFamily, trials: int, seed: int) -> EvalResult:
    """Monte Carlo of the two-stage process.

    Trial ``t`` consumes ``n + m`` uniforms from its own stream: one per
    consumer (inverse-CDF over menu then outside) and one per supplier, which
    matches iff its uniform falls below the demand of its realized request set.
    Revenue only depends on whether a supplier matches, and a consumer appears
    in at most one request set, so the identity of the accepted consumer does
    not need to be drawn.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, m = instance.n, instance.m
    r = instance.r()
    cums = []
    for mdl, menu in zip(instance.consumer_models, family.menus):
        if menu:
            probs, _ = mdl.menu_probs(menu)
            cums.append((np.asarray(menu), np.cumsum(probs)))
        else:
            cums.append((np.zeros(0, dtype=int), np.zeros(0)))
    total = np.zeros(trials)
    matched = np.zeros(m)
    for lo in range(0, trials, _CHUNK):
        hi = min(trials, lo + _CHUNK)
        u = trial_uniforms(seed, lo, hi, n + m)
        picks = np.full((hi - lo, n), -1)
        for i, (menu, cum) in enumerate(cums):
            if len(menu):
                idx = np.searchsorted(cum, u[:, i], side="right")
                inside = idx < len(menu)
                picks[inside, i] = menu[idx[inside]]
        for j, mdl in enumerate(instance.supplier_models):
            requests = picks == j
            q = mdl.demand_masks(requests)
            hit = u[:, n + j] < q
            matched[j] += hit.sum()
            total[lo:hi] += r[j] * hit
    mean = float(total.mean())
    stderr = float(total.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return EvalResult(mean, tuple(float(v) for v in r * matched / trials), stderr)


def eta(instance: Instance, family: AssortmentFamily) -> np.ndarray:
    """Expected number of consumers requesting each supplier."""
    return pick_matrix(instance, family).sum(axis=0)


@dataclass(frozen=True)
class SandwichBound:
    lower: float
    upper: float
    q_min: float


def q_min(instance: Instance) -> float:
    singles = np.eye(instance.n, dtype=bool)
    vals = [mdl.demand_masks(singles).min() for mdl in instance.supplier_models]
    return float(min(vals)) if vals else 0.0


def sandwich(instance: Instance, family: AssortmentFamily) -> SandwichBound:
    upper = float(instance.r() @ np.minimum(1.0, eta(instance, family)))
    qm = q_min(instance) if instance.n else 0.0
    return SandwichBound((1 - math.exp(-1)) * qm * upper, upper, qm)


def biconjugate_alpha_beta(x) -> tuple[float, float]:
    """``1 - prod(1 - x)`` and its concave envelope ``min(1, sum x)``."""
    x = np.asarray(x, dtype=float)
    return float(1 - np.prod(1 - x)), float(min(1.0, x.sum()))


@dataclass(frozen=True)
class BruteForceResult:
    opt_value: float
    opt_family: AssortmentFamily
    families_enumerated: int


def count_families(instance: Instance) -> int:
    return math.prod(len(feasible_menus(instance.m, instance.budget(i)))
                     if instance.budgets is not None else 1 << instance.m
                     for i in range(instance.n))


def brute_force_opt(instance: Instance, cap: int = DEFAULT_BRUTE_CAP,
                    tie_tol: float = 1e-12) -> BruteForceResult:
    """Best feasible family by exhaustive enumeration.

    Families are visited in lexicographic order of their indicator matrices
    and the first one within ``tie_tol`` of the maximum is returned. Values
    are computed in batches by the same multilinear expansion as
    :func:`expected_revenue_exact`.
    """
    n, m = instance.n, instance.m
    total = count_families(instance)
    if total > cap:
        raise ValueError(f"cap exceeded: {total} families > {cap}")
    if n == 0:
        return BruteForceResult(0.0, AssortmentFamily(()), 1)
    menus = [feasible_menus(m, instance.budget(i) if instance.budgets is not None else None)
             for i in range(n)]
    # pick vectors per consumer per menu: (len(menus_i), m)
    picks = []
    for mdl, opts in zip(instance.consumer_models, menus):
        rows = np.zeros((len(opts), m))
        for a, menu in enumerate(opts):
            if menu:
                rows[a, list(menu)] = mdl.menu_probs(menu)[0]
        picks.append(rows)
    sizes = [len(o) for o in menus]
    tables = [_subset_demand(mdl, np.arange(n), n) for mdl in instance.supplier_models]
    r = instance.r()
    values = np.empty(total)
    chunk = max(1, (1 << 22) >> n)
    for lo in range(0, total, chunk):
        hi = min(total, lo + chunk)
        idx = np.stack(np.unravel_index(np.arange(lo, hi), sizes), axis=1)
        val = np.zeros(hi - lo)
        for j in range(m):
            if r[j] == 0:
                continue
            p = np.stack([picks[i][idx[:, i], j] for i in range(n)], axis=1)
            val += r[j] * multilinear_table(tables[j], p)
        values[lo:hi] = val
    best = float(values.max())
    arg = int(np.flatnonzero(values >= best - tie_tol)[0])
    choice = np.unravel_index(arg, sizes)
    fam = AssortmentFamily(tuple(menus[i][choice[i]] for i in range(n)))
    return BruteForceResult(best, fam, total)


def separable_allocation(r, u0, n: int, demand_by_size=None) -> tuple[float, np.ndarray]:
    """Maximize ``sum_j r_j g_j(k_j)`` over nonnegative integers summing to ``n``.

    ``g_j(k) = k / (k + u0_j)`` unless ``demand_by_size`` supplies per-supplier
    callables. Each summand is concave in ``k_j``, so assigning consumers one
    at a time to the largest marginal gain (lowest index on ties) is exact.
    """
    r = np.asarray(r, dtype=float)
    m = len(r)
    if demand_by_size is None:
        u0 = np.asarray(u0, dtype=float)

        def g(k):
            k = np.asarray(k, dtype=float)
            out = np.zeros(m)
            np.divide(k, k + u0, out=out, where=k > 0)
            return out
    else:
        def g(k):
            return np.array([f(np.array([kk]))[0] for f, kk in zip(demand_by_size, k)])
    k = np.zeros(m, dtype=int)
    cur = g(k)
    nxt = g(k + 1)
    for _ in range(n):
        gain = r * (nxt - cur)
        j = int(np.argmax(gain))
        k[j] += 1
        cur[j] = nxt[j]
        nxt[j] = g(k + 1)[j]
    return float(r @ g(k)), k


@lru_cache(maxsize=16)
def _submask_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    ts, As = [], []
    for t in range(1 << n):
        a = t
        while True:
            ts.append(t)
            As.append(a)
            if a == 0:
                break
            a = (a - 1) & t
    return np.asarray(ts, dtype=np.int64), np.asarray(As, dtype=np.int64)


def partition_welfare_opt(instance: Instance) -> float:
    """Exact max of ``sum_j r_j Q_j(A_j)`` over partitions of all consumers (subset DP)."""
    n = instance.n
    ts, As = _submask_pairs(n)
    masks = _all_masks(n)
    best = np.full(1 << n, -np.inf)
    best[0] = 0.0
    for mdl, rj in zip(instance.supplier_models, instance.revenues):
        q = rj * mdl.demand_masks(masks)
        cand = best[ts ^ As] + q[As]
        nxt = np.full(1 << n, -np.inf)
        np.maximum.at(nxt, ts, cand)
        best = nxt
    return float(best[-1])


def welfare_upper_bound(instance: Instance) -> float:
    """Optimal welfare of assigning every consumer to one supplier; bounds OPT from above."""
    if instance.n == 0:
        return 0.0
    models = instance.supplier_models
    if all(mdl.size_only for mdl in models):
        value, _ = separable_allocation(instance.r(), None, instance.n,
                                        [mdl.demand_by_size for mdl in models])
        return value
    if instance.n <= MAX_PARTITION_N and instance.m <= MAX_PARTITION_M:
        return partition_welfare_opt(instance)
    raise NoExactPath(f"no exact path for n={instance.n}, m={instance.m}")


def all_families(instance: Instance):
    menus = [feasible_menus(instance.m, instance.budget(i) if instance.budgets is not None else None)
             for i in range(instance.n)]
    for combo in itertools.product(*menus):
        yield AssortmentFamily(combo)
