"""Submodular welfare over a partition matroid and the singleton-menu algorithm built on it.

Consumers are items and suppliers are players: player ``j`` values a set
``A`` of consumers at ``f_j(A) = r_j Q_j(A)``. Set functions are oracles
mapping a boolean matrix of shape ``(B, k)`` (one subset per row) to ``B``
values.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._random import rng as make_rng
from .choice import _all_masks
from .core import AssortmentFamily, Instance
from .evaluate import multilinear_table, poisson_binomial_pmf

SetFunction = Callable[[np.ndarray], np.ndarray]

MAX_EXACT_GROUND = 20


@dataclass(frozen=True)
class WelfareInstance:
    n: int
    players: tuple[SetFunction, ...]
    # g_j(k) with f_j(A) = g_j(|A|), when player j only looks at set sizes
    size_values: tuple[Callable[[np.ndarray], np.ndarray] | None, ...] | None = None

    @property
    def m(self) -> int:
        return len(self.players)

    @classmethod
    def from_instance(cls, instance: Instance) -> "WelfareInstance":
        players, sizes = [], []
        for mdl, r in zip(instance.supplier_models, instance.revenues):
            players.append(lambda masks, mdl=mdl, r=r: r * mdl.demand_masks(masks))
            sizes.append((lambda k, mdl=mdl, r=r: r * mdl.demand_by_size(k)) if mdl.size_only else None)
        return cls(instance.n, tuple(players), tuple(sizes))

    def size_fn(self, j: int):
        return None if self.size_values is None else self.size_values[j]

    def check(self, tol: float = 1e-12) -> list[str]:
        """Exhaustive monotonicity and normalization check (``n <= 15`` only)."""
        if self.n > 15:
            raise ValueError("ground set too large for an exhaustive check")
        masks = _all_masks(self.n)
        codes = np.arange(1 << self.n)
        errs = []
        for j, f in enumerate(self.players):
            vals = f(masks)
            if abs(vals[0]) > tol:
                errs.append(f"player {j}: f(empty) = {vals[0]}")
            for i in range(self.n):
                lo = codes[(codes >> i) & 1 == 0]
                if np.any(vals[lo | (1 << i)] < vals[lo] - tol):
                    errs.append(f"player {j}: not monotone in item {i}")
                    break
        return errs


@dataclass(frozen=True)
class Partition:
    """``assignment[i]`` is the player receiving item ``i``, or -1."""

    assignment: tuple[int, ...]

    def sets(self, m: int) -> np.ndarray:
        a = np.asarray(self.assignment, dtype=int)
        return a[None, :] == np.arange(m)[:, None]  # (m, n)

    def value(self, w: WelfareInstance) -> float:
        S = self.sets(w.m)
        return float(sum(f(S[j:j + 1])[0] for j, f in enumerate(w.players)))


@dataclass(frozen=True)
class ContinuousGreedyConfig:
    delta: float = 0.01
    gradient_samples: int = 64
    exact_threshold: int = 16

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        steps = round(1 / self.delta)
        if abs(steps * self.delta - 1) > 1e-9:
            raise ValueError("1/delta must be an integer")
        if self.gradient_samples < 1:
            raise ValueError("gradient_samples must be >= 1")

    @property
    def steps(self) -> int:
        return round(1 / self.delta)


def multilinear(f: SetFunction, y, mode: str = "exact", samples: int = 1000, seed: int = 0) -> float:
    """``F(y) = E[f(R)]`` with each element in ``R`` independently with probability ``y_e``."""
    y = np.asarray(y, dtype=float)
    k = len(y)
    if mode == "exact":
        if k > MAX_EXACT_GROUND:
            raise ValueError(f"exact multilinear extension needs at most {MAX_EXACT_GROUND} elements")
        return float(multilinear_table(f(_all_masks(k)), y[None, :])[0])
    if mode == "sampled":
        R = make_rng(seed).random((samples, k)) < y
        return float(np.mean(f(R)))
    raise ValueError(f"unknown mode {mode!r}")


# greedy ------------------------------------------------------------------------

def _gains(f: SetFunction, current: np.ndarray, items: np.ndarray, base: float) -> np.ndarray:
    masks = np.repeat(current[None, :], len(items), axis=0)
    masks[np.arange(len(items)), items] = True
    return f(masks) - base


def greedy_partition(w: WelfareInstance, lazy: bool = True) -> Partition:
    """Repeatedly assign the unassigned (item, player) pair of largest marginal gain.

    Stops once no pair has positive gain. Ties go to the lowest item, then the
    lowest player. The lazy variant keeps stale gains in a heap and is
    equivalent to the naive one for submodular players.
    """
    return _greedy_lazy(w) if lazy else _greedy_naive(w)


def _greedy_naive(w: WelfareInstance) -> Partition:
    n, m = w.n, w.m
    assign = np.full(n, -1)
    sets = np.zeros((m, n), dtype=bool)
    base = np.array([f(sets[j:j + 1])[0] for j, f in enumerate(w.players)])
    while True:
        free = np.flatnonzero(assign < 0)
        if len(free) == 0:
            break
        gains = np.stack([_gains(f, sets[j], free, base[j]) for j, f in enumerate(w.players)], axis=1)
        best = gains.max()
        if best <= 0:
            break
        a, j = np.argwhere(gains == best)[0]  # row-major: lowest item, then player
        i = free[a]
        assign[i] = j
        sets[j, i] = True
        base[j] = w.players[j](sets[j:j + 1])[0]
    return Partition(tuple(int(a) for a in assign))


def _greedy_lazy(w: WelfareInstance) -> Partition:
    n, m = w.n, w.m
    assign = np.full(n, -1)
    sets = np.zeros((m, n), dtype=bool)
    base = np.array([f(sets[j:j + 1])[0] for j, f in enumerate(w.players)])
    version = [0] * m
    heap = []
    items = np.arange(n)
    for j, f in enumerate(w.players):
        for i, g in zip(items, _gains(f, sets[j], items, base[j])):
            heap.append((-float(g), int(i), j, 0))
    heapq.heapify(heap)
    while heap:
        neg, i, j, ver = heapq.heappop(heap)
        if assign[i] >= 0:
            continue
        if ver != version[j]:
            g = _gains(w.players[j], sets[j], np.array([i]), base[j])[0]
            heapq.heappush(heap, (-float(g), i, j, version[j]))
            continue
        if -neg <= 0:
            break
        assign[i] = j
        sets[j, i] = True
        base[j] = w.players[j](sets[j:j + 1])[0]
        version[j] += 1
    return Partition(tuple(int(a) for a in assign))


# continuous greedy ------------------------------------------------------------

def _size_gradient(g: Callable, p: np.ndarray) -> np.ndarray:
    """``E[g(K_-i + 1) - g(K_-i)]`` where ``K_-i`` counts the other items present."""
    n = len(p)
    vals = g(np.arange(n + 1))
    diff = vals[1:] - vals[:-1]
    out = np.empty(n)
    for i in range(n):
        pmf = poisson_binomial_pmf(np.delete(p, i))
        out[i] = pmf @ diff[:len(pmf)]
    return out


def _table_gradient(table: np.ndarray, p: np.ndarray) -> np.ndarray:
    n = len(p)
    hi = np.repeat(p[None, :], n, axis=0)
    lo = hi.copy()
    np.fill_diagonal(hi, 1.0)
    np.fill_diagonal(lo, 0.0)
    return multilinear_table(table, hi) - multilinear_table(table, lo)


def _sampled_gradient(f: SetFunction, p: np.ndarray, samples: int, gen: np.random.Generator) -> np.ndarray:
    n = len(p)
    R = gen.random((samples, n)) < p
    with_i = np.repeat(R[:, None, :], n, axis=1)
    without_i = with_i.copy()
    idx = np.arange(n)
    with_i[:, idx, idx] = True
    without_i[:, idx, idx] = False
    d = f(with_i.reshape(-1, n)) - f(without_i.reshape(-1, n))
    return d.reshape(samples, n).mean(axis=0)


def continuous_greedy_fractional(w: WelfareInstance, cfg: ContinuousGreedyConfig = ContinuousGreedyConfig(),
                                 seed: int = 0) -> np.ndarray:
    """Fractional point ``y`` (n x m) in the partition polytope after ``1/delta`` steps."""
    n, m = w.n, w.m
    y = np.zeros((n, m))
    tables: dict[int, np.ndarray] = {}
    for step in range(cfg.steps):
        grad = np.empty((n, m))
        for j, f in enumerate(w.players):
            g = w.size_fn(j)
            if g is not None:
                grad[:, j] = _size_gradient(g, y[:, j])
            elif n <= cfg.exact_threshold:
                if j not in tables:
                    tables[j] = f(_all_masks(n))
                grad[:, j] = _table_gradient(tables[j], y[:, j])
            else:
                grad[:, j] = _sampled_gradient(f, y[:, j], cfg.gradient_samples, make_rng(seed, step, j))
        best = np.argmax(grad, axis=1)
        gain = grad[np.arange(n), best]
        pick = gain > 0
        y[np.flatnonzero(pick), best[pick]] += cfg.delta
    return np.minimum(y, 1.0)


def round_partition(y: np.ndarray, seed: int) -> Partition:
    """Each item goes to player ``j`` with probability ``y[i, j]`` and stays unassigned otherwise."""
    u = make_rng(seed, 1).random(len(y))
    cum = np.cumsum(y, axis=1)
    assign = np.where(u < cum[:, -1], np.argmax(u[:, None] < cum, axis=1), -1) if y.shape[1] else \
        np.full(len(y), -1)
    return Partition(tuple(int(a) for a in assign))


def continuous_greedy_partition(w: WelfareInstance, cfg: ContinuousGreedyConfig = ContinuousGreedyConfig(),
                                seed: int = 0) -> Partition:
    return round_partition(continuous_greedy_fractional(w, cfg, seed), seed)


def partition_to_family(p: Partition) -> AssortmentFamily:
    return AssortmentFamily(tuple((a,) if a >= 0 else () for a in p.assignment))


def algorithm1(instance: Instance, solver: str = "greedy", seed: int = 0,
               cfg: ContinuousGreedyConfig | None = None) -> AssortmentFamily:
    """Singleton-or-empty menus: consumer ``i`` is shown the supplier it is assigned to."""
    w = WelfareInstance.from_instance(instance)
    if solver == "greedy":
        part = greedy_partition(w)
    elif solver in ("continuous", "cg"):
        part = continuous_greedy_partition(w, cfg or ContinuousGreedyConfig(), seed)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    return partition_to_family(part)


def algorithm1_fractional(instance: Instance, cfg: ContinuousGreedyConfig | None = None,
                          seed: int = 0) -> np.ndarray:
    """The continuous-greedy point behind :func:`algorithm1`; round with :func:`round_partition`."""
    return continuous_greedy_fractional(WelfareInstance.from_instance(instance),
                                        cfg or ContinuousGreedyConfig(), seed)


def enumerate_partition_opt(w: WelfareInstance) -> float:
    """Best partition value by brute force over ``(m+1)**n`` assignments (tests and small cases)."""
    n = w.n
    tables = [f(_all_masks(n)) for f in w.players]
    codes = np.arange(1 << n)
    # cur[mask]: best value of players seen so far holding exactly the items in mask
    cur = np.full(1 << n, -np.inf)
    cur[0] = 0.0
    for t in tables:
        nxt = np.full(1 << n, -np.inf)
        for mask in codes:
            if cur[mask] == -np.inf:
                continue
            free = ((1 << n) - 1) & ~mask
            a = free
            while True:
                v = cur[mask] + t[a]
                if v > nxt[mask | a]:
                    nxt[mask | a] = v
                if a == 0:
                    break
                a = (a - 1) & free
        cur = nxt
    return float(cur.max())


def players_from_tables(tables: Sequence[np.ndarray], n: int) -> tuple[SetFunction, ...]:
    """Set-function oracles backed by value tables indexed by item bitmask."""
    weights = 1 << np.arange(n)

    def make(t):
        return lambda masks: np.asarray(t)[np.asarray(masks, dtype=np.int64) @ weights]

    return tuple(make(t) for t in tables)
