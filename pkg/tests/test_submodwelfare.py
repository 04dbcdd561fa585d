import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matchassort.choice import MnlModel, TabularModel, UniformModel, _all_masks
from matchassort.core import AssortmentFamily, Instance
from matchassort.evaluate import brute_force_opt, expected_revenue_exact, partition_welfare_opt
from matchassort.submodwelfare import (ContinuousGreedyConfig, Partition, WelfareInstance, algorithm1,
                                       continuous_greedy_fractional, continuous_greedy_partition,
                                       enumerate_partition_opt, greedy_partition, multilinear,
                                       players_from_tables, round_partition)
from _oracles import mnl_uniform_instance, random_instance


def coverage(sets, weights=None):
    """Weighted coverage: element e covers the universe items in ``sets[e]``."""
    universe = max((max(s) for s in sets if s), default=-1) + 1
    w = np.ones(universe) if weights is None else np.asarray(weights)
    cover = np.zeros((len(sets), universe), dtype=bool)
    for e, s in enumerate(sets):
        cover[e, list(s)] = True

    def f(masks):
        masks = np.asarray(masks, dtype=bool)
        covered = (masks.astype(int) @ cover.astype(int)) > 0
        return covered.astype(float) @ w

    return f


def random_submodular(gen, k):
    """Random monotone submodular function: a weighted coverage plus a concave-of-modular term."""
    sets = [set(np.flatnonzero(gen.random(6) < 0.4)) for _ in range(k)]
    cov = coverage(sets + [{5}], gen.uniform(0.1, 1, 6))
    a = gen.uniform(0, 1, k)
    return lambda masks: cov(np.c_[masks, np.zeros(len(masks), bool)]) + np.sqrt(masks.astype(float) @ a)


def test_multilinear_modular():
    w = np.array([0.5, 2.0, 1.5])
    f = lambda masks: masks.astype(float) @ w  # noqa: E731
    y = np.array([0.2, 0.9, 0.4])
    assert multilinear(f, y) == pytest.approx(w @ y)


def test_multilinear_indicator_is_set_value():
    gen = np.random.default_rng(1)
    f = random_submodular(gen, 5)
    S = np.array([1, 0, 1, 1, 0], dtype=bool)
    assert multilinear(f, S.astype(float)) == pytest.approx(f(S[None, :])[0])


def test_multilinear_coverage_two_elements():
    f = coverage([{0}, {0}])
    assert multilinear(f, [0.5, 0.5]) == pytest.approx(0.75)


def test_multilinear_sampled_close_and_deterministic():
    gen = np.random.default_rng(3)
    f = random_submodular(gen, 6)
    y = gen.uniform(0, 1, 6)
    a = multilinear(f, y, "sampled", 20_000, seed=4)
    assert a == multilinear(f, y, "sampled", 20_000, seed=4)
    assert a == pytest.approx(multilinear(f, y), abs=0.05)


def test_multilinear_exact_size_limit():
    with pytest.raises(ValueError):
        multilinear(lambda m: np.zeros(len(m)), np.zeros(21))


@pytest.mark.parametrize("seed", range(20))
def test_half_point_at_least_half_of_full(seed):
    gen = np.random.default_rng(seed)
    k = int(gen.integers(1, 11))
    f = random_submodular(gen, k)
    full = f(np.ones((1, k), bool))[0]
    assert multilinear(f, np.full(k, 0.5)) >= full / 2 - 1e-12


def welfare_from(tables, n):
    return WelfareInstance(n, players_from_tables(tables, n))


def test_greedy_single_consumer():
    w = welfare_from([np.array([0.0, 0.9]), np.array([0.0, 0.4])], 1)
    assert greedy_partition(w).assignment == (0,)


def test_greedy_all_zero():
    w = welfare_from([np.zeros(8), np.zeros(8)], 3)
    assert greedy_partition(w).assignment == (-1, -1, -1)


def test_greedy_alternates_uniform_suppliers():
    inst = Instance((MnlModel((1.0, 1.0)),) * 3, (UniformModel(1.0), UniformModel(1.0)))
    w = WelfareInstance.from_instance(inst)
    part = greedy_partition(w)
    assert part.assignment == (0, 1, 0)
    assert part.value(w) >= 0.5 * partition_welfare_opt(inst)


def test_greedy_ties_lowest_consumer_then_supplier():
    w = welfare_from([np.array([0, 1, 1, 2.0]), np.array([0, 1, 1, 2.0])], 2)
    assert greedy_partition(w).assignment == (0, 0)
    assert greedy_partition(w, lazy=False).assignment == (0, 0)


@pytest.mark.parametrize("seed", range(25))
def test_lazy_greedy_equals_naive_and_half_approx(seed):
    gen = np.random.default_rng(seed)
    n, m = int(gen.integers(1, 9)), int(gen.integers(1, 4))
    inst = random_instance(gen, n, m, supplier_kind=["mnl", "uniform", "popular"][seed % 3])
    w = WelfareInstance.from_instance(inst)
    lazy, naive = greedy_partition(w), greedy_partition(w, lazy=False)
    assert lazy == naive
    opt = enumerate_partition_opt(w)
    assert opt == pytest.approx(partition_welfare_opt(inst), abs=1e-12)
    assert lazy.value(w) >= 0.5 * opt - 1e-12


def test_welfare_instance_check():
    inst = mnl_uniform_instance(np.random.default_rng(0), 4, 2, 1, 2)
    assert WelfareInstance.from_instance(inst).check() == []
    bad = welfare_from([np.array([0.5, 1.0]), np.array([0.0, -1.0])], 1)
    errs = bad.check()
    assert any("f(empty)" in e for e in errs) and any("not monotone" in e for e in errs)


def test_config_validation():
    with pytest.raises(ValueError):
        ContinuousGreedyConfig(delta=0.3)
    with pytest.raises(ValueError):
        ContinuousGreedyConfig(gradient_samples=0)
    assert ContinuousGreedyConfig().steps == 100


def test_continuous_greedy_modular_optimal():
    # independent items: player j values item i at W[i, j]
    W = np.array([[0.3, 0.9], [0.8, 0.1], [0.5, 0.5001]])
    players = tuple((lambda masks, j=j: masks.astype(float) @ W[:, j]) for j in range(2))
    w = WelfareInstance(3, players)
    y = continuous_greedy_fractional(w, ContinuousGreedyConfig(delta=0.05))
    np.testing.assert_allclose(y, [[0, 1], [1, 0], [0, 1]])
    assert continuous_greedy_partition(w, seed=5).assignment == (1, 0, 1)


def test_continuous_greedy_single_consumer_dominated_supplier():
    w = welfare_from([np.array([0.0, 0.9]), np.array([0.0, 0.4])], 1)
    for s in range(10):
        assert continuous_greedy_partition(w, ContinuousGreedyConfig(delta=0.1), s).assignment == (0,)


def test_continuous_greedy_coverage_guarantee():
    gen = np.random.default_rng(11)
    n, m = 4, 2
    tables = []
    for _ in range(m):
        f = random_submodular(gen, n)
        t = f(_all_masks(n))
        tables.append(t - t[0])
    w = welfare_from(tables, n)
    opt = enumerate_partition_opt(w)
    vals = [continuous_greedy_partition(w, ContinuousGreedyConfig(delta=0.05), s).value(w) for s in range(100)]
    se = np.std(vals, ddof=1) / math.sqrt(len(vals))
    assert np.mean(vals) >= (1 - math.exp(-1)) * opt - 2 * se


def test_gradient_paths_agree():
    # size-only, enumerated and sampled gradients drive continuous greedy to similar points
    inst = Instance((MnlModel((1.0, 1.0)),) * 5, (UniformModel(0.5), UniformModel(2.0)))
    w_size = WelfareInstance.from_instance(inst)
    w_enum = WelfareInstance(5, w_size.players)
    cfg = ContinuousGreedyConfig(delta=0.1)
    a = continuous_greedy_fractional(w_size, cfg)
    b = continuous_greedy_fractional(w_enum, cfg)
    np.testing.assert_allclose(a, b, atol=1e-12)
    c = continuous_greedy_fractional(w_enum, ContinuousGreedyConfig(delta=0.1, gradient_samples=4000,
                                                                    exact_threshold=0), seed=1)
    assert np.abs(c - a).sum() <= 0.2 * 5


def test_round_partition_expected_value_equals_multilinear():
    gen = np.random.default_rng(2)
    y = gen.dirichlet(np.ones(3), size=4)[:, :2]
    counts = np.zeros((4, 3))
    for s in range(20_000):
        a = round_partition(y, s).assignment
        counts[np.arange(4), a] += 1
    freq = counts / 20_000
    sigma = np.sqrt(y * (1 - y) / 20_000) + 1e-12
    assert np.all(np.abs(freq[:, :2] - y) <= 4 * sigma)


def test_algorithm1_examples():
    inst = Instance((MnlModel((1.0,)),), (UniformModel(1.0),))
    assert algorithm1(inst) == AssortmentFamily(((0,),))
    zero = Instance((MnlModel((1.0, 2.0)),) * 2, (UniformModel(1.0),) * 2, (0.0, 0.0))
    assert algorithm1(zero) == AssortmentFamily.empty(2)
    assert algorithm1(zero, "continuous", 3) == AssortmentFamily.empty(2)


@pytest.mark.parametrize("seed", range(15))
def test_algorithm1_menus_singletons_and_ratio(seed):
    gen = np.random.default_rng(seed)
    inst = mnl_uniform_instance(gen, int(gen.integers(1, 5)), int(gen.integers(1, 4)), 1.0, 4.0)
    fam = algorithm1(inst)
    assert all(len(s) <= 1 for s in fam.menus)
    value = expected_revenue_exact(inst, fam).value
    assert value >= 0.25 * brute_force_opt(inst).opt_value - 1e-12
    w = WelfareInstance.from_instance(inst)
    part = Partition(tuple(s[0] if s else -1 for s in fam.menus))
    assert value >= 0.5 * part.value(w) - 1e-12


def test_algorithm1_unknown_solver():
    with pytest.raises(ValueError):
        algorithm1(Instance((MnlModel((1.0,)),), (UniformModel(1.0),)), "magic")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_tabulated_player_matches_function(n, seed):
    gen = np.random.default_rng(seed)
    f = random_submodular(gen, n)
    table = f(_all_masks(n))
    (g,) = players_from_tables([table], n)
    masks = gen.random((10, n)) < 0.5
    np.testing.assert_allclose(g(masks), f(masks))


def test_tabular_supplier_uses_enumerated_gradients():
    t = TabularModel.from_model(MnlModel((1.0, 2.0, 0.5), 1.0), 3)
    inst = Instance((MnlModel((1.0,)),) * 3, (t,))
    fam = algorithm1(inst, "continuous", 0, ContinuousGreedyConfig(delta=0.25))
    assert all(len(s) <= 1 for s in fam.menus)
