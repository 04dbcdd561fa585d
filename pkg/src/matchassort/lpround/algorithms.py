"""LP-rounding algorithms for MNL consumers, split into a solve stage and a round stage."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .._random import derive_seed
from ..choice import UniformModel
from ..core import AssortmentFamily, FractionalAssortment, Instance
from ..evaluate import evaluate
from .relax import build_lp_cardinality, build_lp_unconstrained, recover_fractional
from .rounding import dependent_round, independent_round
from .simplex import OPTIMAL, LpSolution, solve_lp


@dataclass(frozen=True, eq=False)
class Relaxation:
    solution: LpSolution
    x: FractionalAssortment

    @property
    def value(self) -> float:
        return self.solution.value


def _warn_regime(instance: Instance) -> None:
    if instance.n and np.any(instance.consumer_scores() >= 1):
        warnings.warn("some consumer score v_ij >= 1; the rounding guarantee does not apply")


def solve_relaxation(instance: Instance, budgeted: bool = False, method: str = "simplex",
                     lp_dump: str | None = None) -> Relaxation:
    lp = build_lp_cardinality(instance) if budgeted else build_lp_unconstrained(instance)
    if lp_dump:
        lp.dump(lp_dump)
    sol = solve_lp(lp, method=method)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"LP solve failed: {sol.status}")
    return Relaxation(sol, recover_fractional(sol, instance))


def algorithm2(instance: Instance, seed: int = 0, relaxation: Relaxation | None = None,
               **solve_kw) -> AssortmentFamily:
    """Solve the unconstrained LP and round every pair independently."""
    _warn_regime(instance)
    rel = relaxation or solve_relaxation(instance, False, **solve_kw)
    return independent_round(rel.x, seed)


def algorithm3(instance: Instance, seed: int = 0, relaxation: Relaxation | None = None,
               **solve_kw) -> AssortmentFamily:
    """Solve the budgeted LP and round each consumer's row dependently; menus respect budgets."""
    if instance.budgets is None:
        raise ValueError("budgets missing")
    _warn_regime(instance)
    rel = relaxation or solve_relaxation(instance, True, **solve_kw)
    return dependent_round(rel.x, seed)


def _lift(family: AssortmentFamily, keep: list[int]) -> AssortmentFamily:
    return AssortmentFamily(tuple(tuple(keep[j] for j in menu) for menu in family.menus))


def split_combine(instance: Instance, seed: int = 0, trials: int = 1000,
                  max_enum: int = 20) -> AssortmentFamily:
    """Best of two candidates: singleton menus over high-score suppliers, LP rounding over the rest.

    Requires consumers to share one score per supplier. Suppliers with
    ``v_j >= 1`` go to the welfare-greedy algorithm, the others to the LP
    algorithm (budgeted when budgets are present). Both families are
    evaluated on the full instance and the better one is returned, the
    high-score one on ties.
    """
    from ..submodwelfare import algorithm1

    v = instance.consumer_scores()
    if instance.n and not np.allclose(v, v[0], rtol=0, atol=1e-12):
        raise ValueError("consumers must share scores v_ij = v_j")
    for j, mdl in enumerate(instance.supplier_models):
        if not isinstance(mdl, UniformModel) or mdl.outside_weight > 1:
            warnings.warn(f"supplier {j} is not Uniform with outside weight <= 1")
            break
    shared = v[0] if instance.n else np.zeros(instance.m)
    high = [j for j in range(instance.m) if shared[j] >= 1]
    low = [j for j in range(instance.m) if shared[j] < 1]
    candidates = []
    if high:
        sub = instance.with_suppliers(high)
        candidates.append(_lift(algorithm1(sub, "greedy", seed), high))
    if low:
        sub = instance.with_suppliers(low)
        alg = algorithm3 if instance.budgets is not None else algorithm2
        candidates.append(_lift(alg(sub, derive_seed(seed, 1)), low))
    values = [evaluate(instance, fam, trials, derive_seed(seed, 2), max_enum).value for fam in candidates]
    return candidates[int(np.argmax(values))]
