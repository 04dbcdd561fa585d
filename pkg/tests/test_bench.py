import json
import math
from pathlib import Path

import numpy as np
import pytest

from matchassort.bench import (CSV_COLUMNS, BenchConfig, GenSpec, baseline, generate, rows_to_csv,
                               run_bench, spec_to_json)
from matchassort.choice import MnlModel, UniformModel
from matchassort.core import AssortmentFamily, Instance, validate

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize("family", ["mnl-mnl", "samemnl-unif", "mnl-unif"])
def test_generated_instances_valid(family):
    inst = generate(GenSpec(family, 5, 4, seed=3))
    assert validate(inst) == [] and (inst.n, inst.m) == (5, 4)
    assert inst.budgets is None


def test_generator_regimes():
    mm = generate(GenSpec("mnl-mnl", 6, 5, seed=1))
    v = mm.consumer_scores()
    assert v.min() >= 1.0 and v.max() <= 5.0
    u, u0 = mm.supplier_scores()
    assert u.min() >= 0.01 and u.max() <= 1.0 and np.all(u0 == 1.0)

    mu = generate(GenSpec("mnl-unif", 6, 5, lambda_v=2.0, lambda_0=0.5, seed=1))
    v = mu.consumer_scores()
    assert np.all((v > 0) & (v <= 1))
    assert all(isinstance(s, UniformModel) and 0 < s.outside_weight <= 1 for s in mu.supplier_models)

    same = generate(GenSpec("samemnl-unif", 6, 5, seed=1)).consumer_scores()
    assert np.all(same == same[0])

    k = generate(GenSpec("mnl-unif-k", 6, 5, k=2, seed=1))
    assert k.budgets == (2,) * 6


def test_rate_controls_mean_score():
    # v = 1/(1+E) with E ~ Exp(rate); a larger rate means smaller E and larger scores
    lo = generate(GenSpec("mnl-unif", 200, 20, lambda_v=0.2, seed=0)).consumer_scores().mean()
    hi = generate(GenSpec("mnl-unif", 200, 20, lambda_v=5.0, seed=0)).consumer_scores().mean()
    assert lo < 0.4 < 0.7 < hi


def test_generator_deterministic():
    a = generate(GenSpec("mnl-mnl", 4, 3, seed=9))
    b = generate(GenSpec("mnl-mnl", 4, 3, seed=9))
    np.testing.assert_array_equal(a.consumer_scores(), b.consumer_scores())
    c = generate(GenSpec("mnl-mnl", 4, 3, seed=10))
    assert not np.array_equal(a.consumer_scores(), c.consumer_scores())


def test_genspec_validation():
    with pytest.raises(ValueError):
        GenSpec("nope", 2, 2)
    with pytest.raises(ValueError):
        GenSpec("mnl-unif-k", 2, 2)
    with pytest.raises(ValueError):
        GenSpec("mnl-unif-k", 2, 2, k=3)
    with pytest.raises(ValueError):
        GenSpec("mnl-unif", 2, 2, lambda_v=0.0)
    spec = GenSpec("mnl-unif-k", 2, 2, lambda_v=3.0, k=1)
    assert spec.lambda_v == 1.0
    assert spec_to_json(spec)["k"] == 1


def _plain(n, m, budgets=None):
    return Instance((MnlModel((1.0,) * m),) * n, (UniformModel(1.0),) * m, None, budgets)


def test_baseline_vn_and_budgets():
    assert baseline("vn", _plain(3, 4)) == AssortmentFamily.full(3, 4)
    fam = baseline("vn", _plain(3, 4, (2, 1, 4)), seed=5)
    assert [len(s) for s in fam.menus] == [2, 1, 4]


def test_baseline_r1_frequency():
    inst = _plain(100, 100)
    fam = baseline("r1", inst, seed=0)
    freq = sum(len(s) for s in fam.menus) / 10_000
    assert abs(freq - 0.5) <= 0.02


def test_baseline_r1_truncated():
    fam = baseline("r1", _plain(50, 6, (2,) * 50), seed=1)
    assert fam.is_feasible(_plain(50, 6, (2,) * 50))


def test_baseline_r2_sizes():
    inst = _plain(3, 5)
    ref = AssortmentFamily(((0,), (), (1, 2, 3)))
    fam = baseline("r2", inst, ref, seed=2)
    assert [len(s) for s in fam.menus] == [1, 0, 3]
    with pytest.raises(ValueError):
        baseline("r2", inst)
    with pytest.raises(ValueError):
        baseline("r9", inst)


SMALL = [GenSpec("mnl-unif", 4, 3, seed=0), GenSpec("mnl-unif-k", 4, 3, k=1)]


def test_run_bench_rows_and_csv():
    rows = run_bench(SMALL, ["alg2", "vn", "r1", "r2"], instances_per_cell=2, rounding_seeds=2,
                     mc_trials=100, seed=4)
    text = rows_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    algs = [r.algorithm for r in rows]
    assert algs[:4] == ["alg2", "vn", "r1", "r2"]
    assert "ub-lp" in algs and "ub-fw" in algs
    for r in rows:
        assert r.error is None and r.instances == 2
    # welfare bound is exact only for small populations; here it applies
    assert "ub-welfare" in algs


def test_upper_bounds_dominate_algorithms():
    rows = run_bench([GenSpec("mnl-unif", 4, 3, seed=0)], ["alg2", "alg4", "vn"], instances_per_cell=3,
                     rounding_seeds=3, seed=1)
    by = {r.algorithm: r for r in rows}
    for ub in ("ub-welfare", "ub-lp", "ub-fw"):
        for alg in ("alg2", "alg4", "vn"):
            assert by[ub].mean >= by[alg].mean - 1e-9


def test_run_bench_byte_identical_without_timing():
    kw = dict(instances_per_cell=2, rounding_seeds=2, mc_trials=100, seed=4)
    a = rows_to_csv(run_bench(SMALL, ["alg4", "r1"], **kw), timing=False)
    b = rows_to_csv(run_bench(SMALL, ["alg4", "r1"], **kw), timing=False)
    assert a == b
    assert all(line.endswith(",") for line in a.splitlines()[1:])


def test_run_bench_failure_row():
    # alg3 needs budgets, so the unbudgeted cell records an error instead of aborting
    rows = run_bench([GenSpec("mnl-unif", 3, 2)], ["alg3", "vn"], instances_per_cell=1, rounding_seeds=1,
                     upper_bounds=())
    by = {r.algorithm: r for r in rows}
    assert "budgets" in by["alg3"].error and math.isnan(by["alg3"].mean)
    assert by["vn"].error is None


def test_r2_without_main_algorithm_fails():
    rows = run_bench([GenSpec("mnl-unif", 3, 2)], ["r2"], instances_per_cell=1, upper_bounds=())
    assert "non-baseline" in rows[0].error


def test_inapplicable_bound_omitted():
    rows = run_bench([GenSpec("mnl-mnl", 13, 2)], ["vn"], instances_per_cell=1, upper_bounds=("ub-welfare",))
    assert [r.algorithm for r in rows] == ["vn"]


def test_deterministic_algorithms_single_seed():
    rows = run_bench([GenSpec("mnl-unif", 3, 2)], ["vn"], instances_per_cell=2, rounding_seeds=5,
                     upper_bounds=())
    assert rows[0].seed_std == 0.0


def test_config_parsing(tmp_path):
    cfg = BenchConfig.load(CONFIGS / "smoke.json")
    assert len(cfg.groups) == 1 and cfg.groups[0][0][1].k == 1
    assert cfg.mc_trials == 200 and cfg.seed == 1
    desk = BenchConfig.load(CONFIGS / "desk.json")
    assert len(desk.groups) == 2
    assert desk.groups[1][1] == ["alg3", "alg5", "vn", "r1", "r2"]
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"specs": [{"family": "mnl-mnl", "n": 2, "m": 2}], "algorithms": ["vn"],
                             "instances_per_cell": 1, "upper_bounds": []}))
    rows = BenchConfig.load(p).run()
    assert [r.algorithm for r in rows] == ["vn"]
