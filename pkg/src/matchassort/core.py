"""Domain types shared by every module, validation, and JSON serialization.

Indices are 0-based in memory and 1-based in files and CLI output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .choice import ChoiceModel, MnlModel, UniformModel, model_from_json


@dataclass(frozen=True)
class Instance:
    """Consumers ``0..n-1`` choose among suppliers ``0..m-1`` and vice versa."""

    consumer_models: tuple[ChoiceModel, ...]
    supplier_models: tuple[ChoiceModel, ...]
    revenues: tuple[float, ...] | None = None
    budgets: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "consumer_models", tuple(self.consumer_models))
        object.__setattr__(self, "supplier_models", tuple(self.supplier_models))
        if self.revenues is None:
            object.__setattr__(self, "revenues", (1.0,) * len(self.supplier_models))
        else:
            object.__setattr__(self, "revenues", tuple(float(r) for r in self.revenues))
        if self.budgets is not None:
            object.__setattr__(self, "budgets", tuple(int(k) for k in self.budgets))

    @property
    def n(self) -> int:
        return len(self.consumer_models)

    @property
    def m(self) -> int:
        return len(self.supplier_models)

    def r(self) -> np.ndarray:
        return np.asarray(self.revenues, dtype=float)

    def budget(self, i: int) -> int:
        return self.m if self.budgets is None else self.budgets[i]

    def consumer_scores(self) -> np.ndarray:
        """n x m matrix of MNL consumer scores normalized to outside weight 1."""
        rows = []
        for i, mdl in enumerate(self.consumer_models):
            if not isinstance(mdl, MnlModel):
                raise ValueError(f"consumer {i} is not MNL")
            rows.append(mdl.normalized_weights())
        return np.array(rows, dtype=float).reshape(self.n, self.m)

    def supplier_scores(self) -> tuple[np.ndarray, np.ndarray]:
        """(m x n score matrix, outside weights) with Uniform read as unit scores."""
        u = np.ones((self.m, self.n))
        u0 = np.zeros(self.m)
        for j, mdl in enumerate(self.supplier_models):
            if isinstance(mdl, MnlModel):
                u[j] = mdl.weights
            elif not isinstance(mdl, UniformModel):
                raise ValueError(f"supplier {j} is neither MNL nor Uniform")
            u0[j] = mdl.outside_weight
        return u, u0

    def with_suppliers(self, keep: Sequence[int]) -> "Instance":
        """Sub-instance restricted to the given suppliers (consumer MNL weights restricted too)."""
        keep = list(keep)
        consumers = []
        for mdl in self.consumer_models:
            if isinstance(mdl, MnlModel):
                consumers.append(MnlModel(tuple(mdl.weights[j] for j in keep), mdl.outside_weight))
            else:
                raise ValueError("supplier restriction needs MNL consumers")
        budgets = None
        if self.budgets is not None:
            budgets = tuple(min(k, max(len(keep), 1)) for k in self.budgets)
        return Instance(tuple(consumers), tuple(self.supplier_models[j] for j in keep),
                        tuple(self.revenues[j] for j in keep), budgets)


@dataclass(frozen=True)
class AssortmentFamily:
    """One menu of supplier indices per consumer."""

    menus: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "menus", tuple(tuple(sorted(set(int(j) for j in s)))
                                                for s in self.menus))

    @property
    def n(self) -> int:
        return len(self.menus)

    @classmethod
    def empty(cls, n: int) -> "AssortmentFamily":
        return cls(((),) * n)

    @classmethod
    def full(cls, n: int, m: int) -> "AssortmentFamily":
        return cls((tuple(range(m)),) * n)

    @classmethod
    def from_indicator(cls, x: np.ndarray) -> "AssortmentFamily":
        x = np.asarray(x)
        return cls(tuple(tuple(int(j) for j in np.flatnonzero(row > 0.5)) for row in x))

    def is_feasible(self, instance: Instance) -> bool:
        if self.n != instance.n:
            return False
        for i, s in enumerate(self.menus):
            if any(j < 0 or j >= instance.m for j in s):
                return False
            if len(s) > instance.budget(i):
                return False
        return True

    def to_json(self) -> dict:
        return {"menus": [[j + 1 for j in s] for s in self.menus]}

    @classmethod
    def from_json(cls, obj: dict) -> "AssortmentFamily":
        return cls(tuple(tuple(j - 1 for j in s) for s in obj["menus"]))


@dataclass(frozen=True, eq=False)
class FractionalAssortment:
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 2:
            raise ValueError("fractional assortment must be a matrix")
        if np.any(x < 0) or np.any(x > 1):
            raise ValueError("fractional assortment entries must lie in [0,1]")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def threshold(self, level: float = 0.5) -> AssortmentFamily:
        return AssortmentFamily(tuple(tuple(int(j) for j in np.flatnonzero(row > level))
                                      for row in self.x))


@dataclass(frozen=True)
class EvalResult:
    value: float
    per_supplier: tuple[float, ...]
    stderr: float | None = None

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "per_supplier": list(self.per_supplier)}


def to_indicator(family: AssortmentFamily, m: int) -> FractionalAssortment:
    x = np.zeros((family.n, m))
    for i, s in enumerate(family.menus):
        for j in s:
            if not 0 <= j < m:
                raise IndexError(f"supplier index {j} out of range for m={m}")
            x[i, j] = 1.0
    return FractionalAssortment(x)


def _finite_real(v) -> bool:
    try:
        return math.isfinite(float(v))
    except (TypeError, ValueError):
        return False


def validate(instance: Instance) -> list[str]:
    """List every violated invariant; never raises."""
    errs: list[str] = []
    try:
        n, m = instance.n, instance.m
    except Exception as exc:  # noqa: BLE001 - validation is total
        return [f"instance unreadable: {exc}"]
    if n < 1:
        errs.append("n < 1")
    if m < 1:
        errs.append("m < 1")
    revenues = instance.revenues or ()
    if len(revenues) != m:
        errs.append(f"revenues has length {len(revenues)}, expected {m}")
    for j, r in enumerate(revenues):
        if not _finite_real(r):
            errs.append(f"revenues[{j}] not a finite real")
        elif float(r) < 0:
            errs.append(f"revenues[{j}] negative")
    if instance.budgets is not None:
        if len(instance.budgets) != n:
            errs.append(f"budgets has length {len(instance.budgets)}, expected {n}")
        for i, k in enumerate(instance.budgets):
            if k < 1:
                errs.append(f"budgets[{i}] < 1")
            elif k > m:
                errs.append(f"budgets[{i}] > m")
    for side, models, size in (("consumers", instance.consumer_models, m),
                               ("suppliers", instance.supplier_models, n)):
        for idx, mdl in enumerate(models):
            if not isinstance(mdl, ChoiceModel):
                errs.append(f"{side}[{idx}] is not a choice model")
                continue
            try:
                g = mdl.ground_size
                if g is not None and g != size:
                    errs.append(f"{side}[{idx}] ground set has size {g}, expected {size}")
                errs.extend(f"{side}[{idx}] {e}" for e in mdl.validate())
            except Exception as exc:  # noqa: BLE001
                errs.append(f"{side}[{idx}] invalid: {exc}")
    for i, mdl in enumerate(instance.consumer_models):
        if isinstance(mdl, MnlModel) and not mdl.outside_weight > 0:
            errs.append(f"consumers[{i}] outside_weight not positive")
    return errs


# JSON ---------------------------------------------------------------------------

def instance_to_json(instance: Instance) -> dict:
    return {
        "n": instance.n,
        "m": instance.m,
        "revenues": list(instance.revenues),
        "budgets": None if instance.budgets is None else list(instance.budgets),
        "consumers": [mdl.to_json() for mdl in instance.consumer_models],
        "suppliers": [mdl.to_json() for mdl in instance.supplier_models],
    }


def instance_from_json(obj: dict) -> Instance:
    consumers = tuple(model_from_json(o) for o in obj["consumers"])
    suppliers = tuple(model_from_json(o) for o in obj["suppliers"])
    if "n" in obj and obj["n"] != len(consumers):
        raise ValueError("n does not match the number of consumer models")
    if "m" in obj and obj["m"] != len(suppliers):
        raise ValueError("m does not match the number of supplier models")
    revenues = obj.get("revenues")
    budgets = obj.get("budgets")
    return Instance(consumers, suppliers,
                    None if revenues is None else tuple(revenues),
                    None if budgets is None else tuple(budgets))


def dumps(obj: dict) -> str:
    # repr-precision floats round-trip exactly
    return json.dumps(obj, indent=1)


def load_instance(path: str | Path) -> Instance:
    return instance_from_json(json.loads(Path(path).read_text()))


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_json(instance)))


def load_family(path: str | Path) -> AssortmentFamily:
    return AssortmentFamily.from_json(json.loads(Path(path).read_text()))


def feasible_menus(m: int, budget: int | None = None) -> list[tuple[int, ...]]:
    """All menus of size at most ``budget``, ordered lexicographically by indicator vector."""
    k = m if budget is None else budget
    menus = []
    for code in range(1 << m):
        ind = tuple((code >> (m - 1 - j)) & 1 for j in range(m))
        if sum(ind) <= k:
            menus.append(tuple(j for j in range(m) if ind[j]))
    return menus
