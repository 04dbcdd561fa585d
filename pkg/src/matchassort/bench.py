"""Random instance families, baseline menus, and the benchmark harness."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ._random import derive_seed, rng as make_rng
from .choice import MnlModel, UniformModel
from .concave import ConcaveProgram, FwConfig, FwResult, algorithm4, algorithm5, frank_wolfe
from .core import AssortmentFamily, Instance
from .evaluate import evaluate, welfare_upper_bound
from .lpround.algorithms import Relaxation, algorithm2, algorithm3, solve_relaxation, split_combine
from .submodwelfare import ContinuousGreedyConfig, algorithm1

FAMILIES = ("mnl-mnl", "samemnl-unif", "mnl-unif", "mnl-unif-k")
BASELINES = ("vn", "r1", "r2")
ALGORITHMS = ("alg1-greedy", "alg1-cg", "alg2", "alg3", "alg4", "alg5", "split")
UPPER_BOUNDS = ("ub-welfare", "ub-lp", "ub-fw")
CSV_COLUMNS = ("family", "n", "m", "lambda_v", "lambda_0", "K", "algorithm", "mean", "std", "cpu_s")

BENCH_MAX_ENUM = 12


@dataclass(frozen=True)
class GenSpec:
    family: str
    n: int
    m: int
    lambda_v: float = 1.0
    lambda_0: float = 1.0
    k: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.lambda_v <= 0 or self.lambda_0 <= 0:
            raise ValueError("rates must be positive")
        if self.family == "mnl-unif-k":
            if self.k is None or not 1 <= self.k <= self.m:
                raise ValueError("mnl-unif-k needs 1 <= k <= m")
            object.__setattr__(self, "lambda_v", 1.0)
            object.__setattr__(self, "lambda_0", 1.0)

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(self.family, self.n, self.m, self.lambda_v, self.lambda_0, self.k, seed)


def generate(spec: GenSpec) -> Instance:
    gen = make_rng(spec.seed)
    n, m = spec.n, spec.m
    if spec.family == "mnl-mnl":
        v = gen.uniform(1.0, 5.0, (n, m))
        u = gen.uniform(0.01, 1.0, (m, n))
        consumers = [MnlModel(tuple(row)) for row in v]
        suppliers = [MnlModel(tuple(row), 1.0) for row in u]
        return Instance(tuple(consumers), tuple(suppliers))
    if spec.family == "samemnl-unif":
        v = np.broadcast_to(1.0 / (1.0 + gen.exponential(1 / spec.lambda_v, m)), (n, m))
    else:
        v = 1.0 / (1.0 + gen.exponential(1 / spec.lambda_v, (n, m)))
    u0 = 1.0 / (1.0 + gen.exponential(1 / spec.lambda_0, m))
    consumers = [MnlModel(tuple(float(a) for a in row)) for row in v]
    suppliers = [UniformModel(float(a)) for a in u0]
    budgets = (spec.k,) * n if spec.family == "mnl-unif-k" else None
    return Instance(tuple(consumers), tuple(suppliers), None, budgets)


def _random_subset(gen: np.random.Generator, items: Sequence[int], size: int) -> tuple[int, ...]:
    items = list(items)
    if size >= len(items):
        return tuple(items)
    return tuple(sorted(int(j) for j in gen.choice(items, size, replace=False)))


def baseline(kind: str, instance: Instance, reference: AssortmentFamily | None = None,
             seed: int = 0) -> AssortmentFamily:
    """Reference menus: everything (``vn``), fair coins (``r1``), or random menus sized like ``reference`` (``r2``)."""
    gen = make_rng(seed)
    n, m = instance.n, instance.m
    if kind == "vn":
        menus = [_random_subset(gen, range(m), instance.budget(i)) for i in range(n)]
    elif kind == "r1":
        coins = gen.random((n, m)) < 0.5
        menus = [_random_subset(gen, np.flatnonzero(coins[i]), instance.budget(i)) for i in range(n)]
    elif kind == "r2":
        if reference is None:
            raise ValueError("r2 needs a reference family")
        menus = [_random_subset(gen, range(m), min(len(reference.menus[i]), instance.budget(i)))
                 for i in range(n)]
    else:
        raise ValueError(f"unknown baseline {kind!r}")
    return AssortmentFamily(tuple(menus))


@dataclass
class BenchRow:
    family: str
    n: int
    m: int
    lambda_v: float
    lambda_0: float
    K: int | None
    algorithm: str
    mean: float
    std: float
    cpu_s: float
    instances: int = 0
    seed_std: float = 0.0  # mean over instances of the spread across rounding seeds
    stderr: float = 0.0
    error: str | None = None

    def csv_fields(self, timing: bool = True) -> list[str]:
        return [self.family, str(self.n), str(self.m), f"{self.lambda_v:.4f}", f"{self.lambda_0:.4f}",
                "" if self.K is None else str(self.K), self.algorithm,
                f"{self.mean:.4f}", f"{self.std:.4f}", f"{self.cpu_s:.4f}" if timing else ""]


class _Solver:
    """Per-instance solve cache so each relaxation is solved once and rounded many times."""

    def __init__(self, instance: Instance, fw_cfg: FwConfig, cg_cfg: ContinuousGreedyConfig):
        self.instance = instance
        self.fw_cfg = fw_cfg
        self.cg_cfg = cg_cfg
        self._lp: dict[bool, Relaxation] = {}
        self._fw: dict[bool, FwResult] = {}

    def lp(self, budgeted: bool) -> Relaxation:
        if budgeted not in self._lp:
            self._lp[budgeted] = solve_relaxation(self.instance, budgeted)
        return self._lp[budgeted]

    def fw(self, budgeted: bool) -> FwResult:
        if budgeted not in self._fw:
            prog = ConcaveProgram.from_instance(self.instance, budgeted)
            self._fw[budgeted] = frank_wolfe(prog, self.fw_cfg)
        return self._fw[budgeted]

    def run(self, label: str, seed: int, reference: AssortmentFamily | None = None) -> AssortmentFamily:
        inst = self.instance
        if label == "alg1-greedy":
            return algorithm1(inst, "greedy", seed)
        if label == "alg1-cg":
            return algorithm1(inst, "continuous", seed, self.cg_cfg)
        if label == "alg2":
            return algorithm2(inst, seed, self.lp(False))
        if label == "alg3":
            return algorithm3(inst, seed, self.lp(True))
        if label == "alg4":
            return algorithm4(inst, self.fw_cfg, seed, self.fw(False))
        if label == "alg5":
            return algorithm5(inst, self.fw_cfg, seed, self.fw(True))
        if label == "split":
            return split_combine(inst, seed, max_enum=BENCH_MAX_ENUM)
        if label in BASELINES:
            return baseline(label, inst, reference, seed)
        raise ValueError(f"unknown algorithm {label!r}")

    def upper_bound(self, label: str) -> float:
        budgeted = self.instance.budgets is not None
        if label == "ub-welfare":
            return welfare_upper_bound(self.instance)
        if label == "ub-lp":
            return self.lp(budgeted).value
        if label == "ub-fw":
            return self.fw(budgeted).upper_bound
        raise ValueError(f"unknown bound {label!r}")


def _deterministic(label: str, instance: Instance) -> bool:
    return label == "alg1-greedy" or (label == "vn" and instance.budgets is None)


def _aggregate(values: list[float]) -> tuple[float, float, float]:
    a = np.asarray(values, dtype=float)
    if len(a) == 0:
        return math.nan, math.nan, math.nan
    std = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    return float(a.mean()), std, std / math.sqrt(len(a))


def run_bench(specs: Sequence[GenSpec], algorithms: Sequence[str], instances_per_cell: int = 10,
              rounding_seeds: int = 10, mc_trials: int = 1000, seed: int = 0,
              upper_bounds: Sequence[str] = UPPER_BOUNDS, fw_cfg: FwConfig = FwConfig(),
              cg_cfg: ContinuousGreedyConfig = ContinuousGreedyConfig(),
              max_enum: int = BENCH_MAX_ENUM,
              progress: Callable[[str], None] | None = None) -> list[BenchRow]:
    """Average each algorithm's expected revenue over generated instances, per cell.

    Randomness is keyed by ``(seed, cell, instance, rounding seed)`` only, so
    results do not depend on execution order. ``r2`` takes its menu sizes
    from the first non-baseline algorithm listed for the cell.
    """
    rows: list[BenchRow] = []
    labels = list(algorithms)
    main = next((a for a in labels if a not in BASELINES), None)
    for c, spec in enumerate(specs):
        per_inst: dict[str, list[float]] = {a: [] for a in labels + list(upper_bounds)}
        seed_spread: dict[str, list[float]] = {a: [] for a in labels}
        cpu: dict[str, list[float]] = {a: [] for a in labels + list(upper_bounds)}
        errors: dict[str, str] = {}
        for k in range(instances_per_cell):
            inst = generate(spec.with_seed(derive_seed(seed, c, k)))
            solver = _Solver(inst, fw_cfg, cg_cfg)
            for ub in upper_bounds:
                if ub in errors:
                    continue
                t0 = time.process_time()
                try:
                    per_inst[ub].append(solver.upper_bound(ub))
                    cpu[ub].append(time.process_time() - t0)
                except Exception as exc:  # noqa: BLE001 - bound not applicable to this cell
                    errors[ub] = f"{type(exc).__name__}: {exc}"
            refs: dict[int, AssortmentFamily] = {}
            for label in labels:
                if label in errors:
                    continue
                vals = []
                t0 = time.process_time()
                try:
                    n_seeds = 1 if _deterministic(label, inst) else rounding_seeds
                    for r in range(n_seeds):
                        rs = derive_seed(seed, c, k, r)
                        if label == "r2" and r not in refs:
                            if main is None:
                                raise ValueError("r2 needs a non-baseline algorithm in the cell")
                            refs[r] = solver.run(main, rs)
                        fam = solver.run(label, rs, refs.get(r))
                        if label == main:
                            refs[r] = fam
                        vals.append(evaluate(inst, fam, mc_trials, derive_seed(rs, 7), max_enum).value)
                except Exception as exc:  # noqa: BLE001 - recorded in the row
                    errors[label] = f"{type(exc).__name__}: {exc}"
                    continue
                cpu[label].append(time.process_time() - t0)
                per_inst[label].append(float(np.mean(vals)))
                seed_spread[label].append(float(np.std(vals)))
            if progress:
                progress(f"cell {c + 1}/{len(specs)} instance {k + 1}/{instances_per_cell}")
        for label in labels + list(upper_bounds):
            if label in upper_bounds and label in errors:
                continue  # inapplicable bounds are omitted rather than reported
            mean, std, se = _aggregate(per_inst[label]) if label not in errors else (math.nan,) * 3
            rows.append(BenchRow(spec.family, spec.n, spec.m, spec.lambda_v, spec.lambda_0, spec.k,
                                 label, mean, std if not math.isnan(mean) else math.nan,
                                 float(np.mean(cpu[label])) if cpu[label] else math.nan,
                                 len(per_inst[label]),
                                 float(np.mean(seed_spread[label])) if seed_spread.get(label) else 0.0,
                                 se, errors.get(label)))
    return rows


def rows_to_csv(rows: Sequence[BenchRow], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.csv_fields(timing))
    return buf.getvalue()


def write_csv(rows: Sequence[BenchRow], path: str | Path, timing: bool = True) -> None:
    Path(path).write_text(rows_to_csv(rows, timing))


@dataclass
class BenchConfig:
    groups: list[tuple[list[GenSpec], list[str]]]
    instances_per_cell: int = 10
    rounding_seeds: int = 10
    mc_trials: int = 1000
    seed: int = 0
    upper_bounds: list[str] = field(default_factory=lambda: list(UPPER_BOUNDS))
    fw_iters: int = 500
    fw_tol: float = 1e-6

    @classmethod
    def from_json(cls, obj: dict) -> "BenchConfig":
        def specs_of(items):
            return [GenSpec(s["family"], int(s["n"]), int(s["m"]), float(s.get("lambda_v", 1.0)),
                            float(s.get("lambda_0", 1.0)), s.get("k", s.get("K"))) for s in items]

        if "groups" in obj:
            groups = [(specs_of(g["specs"]), list(g["algorithms"])) for g in obj["groups"]]
        else:
            groups = [(specs_of(obj["specs"]), list(obj["algorithms"]))]
        return cls(groups, int(obj.get("instances_per_cell", 10)), int(obj.get("rounding_seeds", 10)),
                   int(obj.get("mc_trials", 1000)), int(obj.get("seed", 0)),
                   list(obj.get("upper_bounds", UPPER_BOUNDS)),
                   int(obj.get("fw_iters", 500)), float(obj.get("fw_tol", 1e-6)))

    @classmethod
    def load(cls, path: str | Path) -> "BenchConfig":
        return cls.from_json(json.loads(Path(path).read_text()))

    def run(self, progress=None) -> list[BenchRow]:
        rows = []
        fw = FwConfig(self.fw_iters, self.fw_tol)
        for g, (specs, algorithms) in enumerate(self.groups):
            rows += run_bench(specs, algorithms, self.instances_per_cell, self.rounding_seeds,
                              self.mc_trials, derive_seed(self.seed, g), self.upper_bounds, fw,
                              progress=progress)
        return rows


def spec_to_json(spec: GenSpec) -> dict:
    return asdict(spec)
