"""Systems of choice probabilities and their demand functions.

Every model chooses among a menu of ground-set elements (0-based indices) plus
an outside option, denoted by :data:`OUTSIDE`. Besides single-menu queries,
each model exposes ``demand_masks`` which evaluates the demand function on a
batch of menus given as a boolean indicator matrix; the evaluators and the
exhaustive checkers are built on that vectorized path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

OUTSIDE = -1

# Checkers enumerate every menu; beyond this the answer would be sampled.
MAX_CHECK_GROUND = 15
CHECK_TOL = 1e-12


def _menu(menu: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(set(int(e) for e in menu)))


def _all_masks(k: int) -> np.ndarray:
    """Boolean matrix whose row ``b`` is the indicator of bitmask ``b``."""
    codes = np.arange(1 << k, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k)) & 1).astype(bool)


class ChoiceModel:
    """Base class; subclasses fill in ``menu_probs`` and ``demand_masks``."""

    kind: str = ""

    @property
    def ground_size(self) -> int | None:
        return None

    def menu_probs(self, menu: tuple[int, ...]) -> tuple[np.ndarray, float]:
        """Probabilities of each element of a sorted menu, and of leaving."""
        raise NotImplementedError

    def demand_masks(self, masks: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # Demand depends on the menu only through its size.
    size_only: bool = False

    def demand_by_size(self, k: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def prob(self, option: int, menu: Iterable[int]) -> float:
        menu = _menu(menu)
        probs, outside = self.menu_probs(menu)
        if option == OUTSIDE:
            return outside
        try:
            return float(probs[menu.index(int(option))])
        except ValueError:
            raise ValueError(f"option {option} not offered in menu {menu}") from None

    def demand(self, menu: Iterable[int]) -> float:
        menu = _menu(menu)
        if not menu:
            return 0.0
        probs, _ = self.menu_probs(menu)
        return float(np.sum(probs))

    def validate(self) -> list[str]:
        return []

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class MnlModel(ChoiceModel):
    """Multinomial logit: weight over outside weight plus total menu weight.

    Consumers require ``outside_weight > 0``; suppliers may use 0.
    """

    weights: tuple[float, ...]
    outside_weight: float = 1.0
    kind = "mnl"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))
        object.__setattr__(self, "outside_weight", float(self.outside_weight))

    @property
    def ground_size(self) -> int:
        return len(self.weights)

    @property
    def size_only(self) -> bool:  # type: ignore[override]
        return len(set(self.weights)) <= 1

    def normalized_weights(self) -> np.ndarray:
        """Weights rescaled so that the outside weight is 1."""
        return np.asarray(self.weights) / self.outside_weight

    def menu_probs(self, menu):
        w = np.asarray([self.weights[e] for e in menu], dtype=float)
        denom = self.outside_weight + w.sum()
        if denom <= 0:
            return np.zeros(len(menu)), 1.0
        return w / denom, self.outside_weight / denom

    def demand_masks(self, masks):
        masks = np.asarray(masks, dtype=bool)
        tot = masks.astype(float) @ np.asarray(self.weights, dtype=float)
        denom = self.outside_weight + tot
        out = np.zeros_like(tot)
        np.divide(tot, denom, out=out, where=denom > 0)
        return out

    def demand_by_size(self, k):
        w = self.weights[0] if self.weights else 1.0
        tot = np.asarray(k, dtype=float) * w
        denom = self.outside_weight + tot
        out = np.zeros_like(tot)
        np.divide(tot, denom, out=out, where=denom > 0)
        return out

    def validate(self):
        errs = [f"weights[{e}] not positive" for e, v in enumerate(self.weights) if not v > 0]
        if not self.outside_weight >= 0:
            errs.append("outside_weight negative")
        return errs

    def to_json(self):
        return {"kind": "mnl", "weights": list(self.weights), "outside_weight": self.outside_weight}


@dataclass(frozen=True)
class UniformModel(ChoiceModel):
    """Picks uniformly among the menu against an outside weight ``u0``.

    With ``u0 = 0`` the empty menu leaves with probability 1.
    """

    outside_weight: float = 1.0
    kind = "uniform"
    size_only = True

    def __post_init__(self):
        object.__setattr__(self, "outside_weight", float(self.outside_weight))

    def menu_probs(self, menu):
        k = len(menu)
        if k == 0:
            return np.zeros(0), 1.0
        denom = k + self.outside_weight
        return np.full(k, 1.0 / denom), self.outside_weight / denom

    def demand_by_size(self, k):
        k = np.asarray(k, dtype=float)
        denom = k + self.outside_weight
        out = np.zeros_like(k)
        np.divide(k, denom, out=out, where=k > 0)
        return out

    def demand_masks(self, masks):
        return self.demand_by_size(np.asarray(masks, dtype=bool).sum(axis=-1))

    def validate(self):
        return [] if self.outside_weight >= 0 else ["outside_weight negative"]

    def to_json(self):
        return {"kind": "uniform", "outside_weight": self.outside_weight}


@dataclass(frozen=True)
class PopularModel(ChoiceModel):
    """One popular element absorbs the choice whenever it is offered.

    If the popular element is in the menu it is chosen with probability
    m/(2(m+1)) and nothing else is; otherwise each element of a menu S is
    chosen with probability 1/(2(|S|+1)).
    """

    popular_index: int
    m: int
    kind = "popular"

    @property
    def ground_size(self) -> int:
        return self.m

    def _popular_prob(self) -> float:
        return self.m / (2.0 * (self.m + 1))

    def menu_probs(self, menu):
        k = len(menu)
        if self.popular_index in menu:
            probs = np.zeros(k)
            probs[menu.index(self.popular_index)] = self._popular_prob()
        else:
            probs = np.full(k, 1.0 / (2.0 * (k + 1)))
        return probs, 1.0 - float(probs.sum())

    def demand_masks(self, masks):
        masks = np.asarray(masks, dtype=bool)
        k = masks.sum(axis=-1).astype(float)
        has_pop = masks[..., self.popular_index]
        return np.where(has_pop, self._popular_prob(), k / (2.0 * (k + 1)))

    def validate(self):
        if not 0 <= self.popular_index < self.m:
            return ["popular_index out of range"]
        return []

    def to_json(self):
        return {"kind": "popular", "popular_index": self.popular_index + 1, "m": self.m}


@dataclass(frozen=True, eq=False)
class TabularModel(ChoiceModel):
    """Explicit table of choice probabilities over a small ground set.

    ``table[mask, 0]`` is the outside probability for the menu encoded by
    bitmask ``mask`` (bit ``e`` set iff element ``e`` is offered) and
    ``table[mask, e + 1]`` the probability of element ``e``.
    """

    table: np.ndarray
    kind = "tabular"
    _demand: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        k = t.shape[1] - 1
        if t.shape[0] != 1 << k:
            raise ValueError("table must have 2**k rows and k+1 columns")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        d = t[:, 1:].sum(axis=1)
        d[0] = 0.0
        d.setflags(write=False)
        object.__setattr__(self, "_demand", d)

    @property
    def ground_size(self) -> int:
        return self.table.shape[1] - 1

    @staticmethod
    def _code(menu: Sequence[int]) -> int:
        return sum(1 << e for e in menu)

    def menu_probs(self, menu):
        row = self.table[self._code(menu)]
        return np.array([row[e + 1] for e in menu]), float(row[0])

    def demand_masks(self, masks):
        masks = np.asarray(masks, dtype=bool)
        codes = masks.astype(np.int64) @ (1 << np.arange(masks.shape[-1], dtype=np.int64))
        return self._demand[codes]

    def validate(self):
        errs = []
        masks = _all_masks(self.ground_size)
        offered = np.concatenate([np.ones((len(masks), 1), bool), masks], axis=1)
        t = self.table
        if np.any(t < -1e-12) or np.any(t > 1 + 1e-12):
            errs.append("table probability outside [0,1]")
        if np.any(np.abs(np.where(offered, 0.0, t)) > 1e-12):
            errs.append("table assigns probability to an option not in the menu")
        if np.any(np.abs(t.sum(axis=1) - 1.0) > 1e-9):
            errs.append("table rows do not sum to 1")
        return errs

    @classmethod
    def from_model(cls, model: ChoiceModel, ground_size: int) -> "TabularModel":
        """Tabulate any model over ground set ``{0..ground_size-1}``."""
        if ground_size > MAX_CHECK_GROUND:
            raise ValueError(f"ground set {ground_size} too large to tabulate")
        table = np.zeros((1 << ground_size, ground_size + 1))
        for code in range(1 << ground_size):
            menu = tuple(e for e in range(ground_size) if code >> e & 1)
            probs, outside = model.menu_probs(menu)
            table[code, 0] = outside
            for e, p in zip(menu, probs):
                table[code, e + 1] = p
        return cls(table)

    @classmethod
    def from_entries(cls, ground_size: int, entries: Iterable[Sequence]) -> "TabularModel":
        """Build from ``(mask, option, prob)`` triples; option 0 is outside, 1-based otherwise."""
        table = np.zeros((1 << ground_size, ground_size + 1))
        for mask, option, p in entries:
            table[int(mask), int(option)] = float(p)
        return cls(table)

    def to_json(self):
        entries = [[int(c), int(o), float(self.table[c, o])]
                   for c, o in zip(*np.nonzero(self.table))]
        return {"kind": "tabular", "ground_size": self.ground_size, "entries": entries}


def mixture_of_mnl(weight_sets: Sequence[Sequence[float]], outside: Sequence[float],
                   mix: Sequence[float]) -> TabularModel:
    """Tabulated mixed logit; a random utility model, hence regular with submodular demand."""
    k = len(weight_sets[0])
    mix = np.asarray(mix, dtype=float) / np.sum(mix)
    table = sum(pi * TabularModel.from_model(MnlModel(w, o), k).table
                for pi, w, o in zip(mix, weight_sets, outside))
    return TabularModel(table)


def model_from_json(obj: dict) -> ChoiceModel:
    kind = obj.get("kind")
    if kind == "mnl":
        return MnlModel(tuple(obj["weights"]), obj.get("outside_weight", 1.0))
    if kind == "uniform":
        return UniformModel(obj.get("outside_weight", 1.0))
    if kind == "popular":
        return PopularModel(int(obj["popular_index"]) - 1, int(obj["m"]))
    if kind == "tabular":
        return TabularModel.from_entries(int(obj["ground_size"]), obj["entries"])
    raise ValueError(f"unknown model kind {kind!r}")


# Module-level operations -------------------------------------------------------

def choice_prob(model: ChoiceModel, option: int, menu: Iterable[int]) -> float:
    return model.prob(option, menu)


def demand(model: ChoiceModel, menu: Iterable[int]) -> float:
    return model.demand(menu)


def _tabulate(model: ChoiceModel, ground_size: int) -> TabularModel:
    if isinstance(model, TabularModel):
        return model
    return TabularModel.from_model(model, ground_size)


def is_regular(model: ChoiceModel, ground_size: int | None = None) -> bool:
    """Enlarging a menu never raises the probability of an option already offered."""
    k = ground_size if ground_size is not None else model.ground_size
    if k is None or k > MAX_CHECK_GROUND:
        raise ValueError("regularity check needs a ground set of at most 15 elements")
    t = _tabulate(model, k).table
    masks = _all_masks(k)
    offered = np.concatenate([np.ones((len(masks), 1), bool), masks], axis=1)
    codes = np.arange(1 << k)
    # Single-element additions suffice by transitivity.
    for e in range(k):
        base = codes[~masks[:, e]]
        grown = base | (1 << e)
        diff = t[grown] - t[base]
        if np.any(diff[offered[base]] > CHECK_TOL):
            return False
    return True


def is_submodular_demand(model: ChoiceModel, ground_size: int) -> bool:
    """Diminishing returns of the demand function, checked on every menu."""
    if ground_size > MAX_CHECK_GROUND:
        raise ValueError("submodularity check needs a ground set of at most 15 elements")
    k = ground_size
    masks = _all_masks(k)
    q = model.demand_masks(masks)
    codes = np.arange(1 << k)
    for e, f in itertools.permutations(range(k), 2):
        a = codes[~masks[:, e] & ~masks[:, f]]
        gain_small = q[a | (1 << e)] - q[a]
        gain_large = q[a | (1 << e) | (1 << f)] - q[a | (1 << f)]
        if np.any(gain_large - gain_small > CHECK_TOL):
            return False
    return True


def is_monotone_demand(model: ChoiceModel, ground_size: int) -> bool:
    k = ground_size
    if k > MAX_CHECK_GROUND:
        raise ValueError("monotonicity check needs a ground set of at most 15 elements")
    masks = _all_masks(k)
    q = model.demand_masks(masks)
    codes = np.arange(1 << k)
    for e in range(k):
        a = codes[~masks[:, e]]
        if np.any(q[a] - q[a | (1 << e)] > CHECK_TOL):
            return False
    return True


def is_easy_to_match(model: ChoiceModel, ground_size: int) -> bool:
    """Facing any single option, the agent takes it at least as often as it leaves."""
    for e in range(ground_size):
        probs, outside = model.menu_probs((e,))
        if probs[0] < outside - CHECK_TOL:
            return False
    return True
