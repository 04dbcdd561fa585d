import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matchassort.choice import MnlModel, PopularModel, UniformModel
from matchassort.core import (AssortmentFamily, FractionalAssortment, Instance, dumps, feasible_menus,
                              instance_from_json, instance_to_json, load_family, load_instance,
                              save_instance, to_indicator, validate)
from _oracles import random_instance


def two_by_two(**kw):
    return Instance((MnlModel((1.0, 2.0)), MnlModel((0.5, 0.5))),
                    (UniformModel(1.0), UniformModel(0.5)), **kw)


def test_validate_well_formed():
    assert validate(two_by_two()) == []


def test_validate_negative_revenue():
    assert validate(two_by_two(revenues=(-1.0, 1.0))) == ["revenues[0] negative"]


def test_validate_zero_budget():
    assert validate(two_by_two(budgets=(0, 1))) == ["budgets[0] < 1"]


def test_validate_reports_several_violations():
    inst = Instance((MnlModel((1.0,)), MnlModel((1.0, 1.0), 0.0)), (UniformModel(-1.0),),
                    budgets=(1, 3))
    errs = validate(inst)
    assert any("consumers[1] ground set" in e for e in errs)
    assert any("suppliers[0]" in e and "negative" in e for e in errs)
    assert "budgets[1] > m" in errs
    assert "consumers[1] outside_weight not positive" in errs


def test_validate_never_raises_on_garbage():
    inst = Instance(("not a model",), (UniformModel(1.0),), revenues=(float("nan"),))
    errs = validate(inst)
    assert any("not a choice model" in e for e in errs)
    assert any("revenues[0]" in e for e in errs)


def test_to_indicator_examples():
    np.testing.assert_array_equal(to_indicator(AssortmentFamily(((0,), ())), 2).x, [[1, 0], [0, 0]])
    np.testing.assert_array_equal(to_indicator(AssortmentFamily(((0, 1), (1,))), 2).x, [[1, 1], [0, 1]])
    np.testing.assert_array_equal(to_indicator(AssortmentFamily.empty(2), 3).x, np.zeros((2, 3)))
    with pytest.raises(IndexError):
        to_indicator(AssortmentFamily(((2,),)), 2)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6), st.data())
def test_indicator_round_trip(n, m, data):
    menus = tuple(tuple(sorted(data.draw(st.sets(st.integers(0, m - 1))))) for _ in range(n))
    fam = AssortmentFamily(menus)
    assert to_indicator(fam, m).threshold() == fam


def test_fractional_bounds_checked():
    with pytest.raises(ValueError):
        FractionalAssortment(np.array([[1.2]]))
    x = FractionalAssortment(np.array([[0.3]]))
    with pytest.raises(ValueError):
        x.x[0, 0] = 0.5


def test_family_feasibility():
    inst = two_by_two(budgets=(1, 2))
    assert AssortmentFamily(((0,), (0, 1))).is_feasible(inst)
    assert not AssortmentFamily(((0, 1), ())).is_feasible(inst)
    assert not AssortmentFamily(((5,), ())).is_feasible(inst)


def test_feasible_menus_order_and_budget():
    assert feasible_menus(2) == [(), (1,), (0,), (0, 1)]
    assert len(feasible_menus(4, 2)) == 1 + 4 + 6


@pytest.mark.parametrize("seed", range(5))
def test_instance_json_round_trip(seed, tmp_path):
    gen = np.random.default_rng(seed)
    inst = random_instance(gen, 3, 3, budgets=seed % 2 == 0)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert back.revenues == inst.revenues and back.budgets == inst.budgets
    for a, b in zip(inst.consumer_models + inst.supplier_models, back.consumer_models + back.supplier_models):
        for menu in [(0,), (0, 2), (0, 1, 2)]:
            np.testing.assert_allclose(a.menu_probs(menu)[0], b.menu_probs(menu)[0], atol=1e-12)


def test_json_is_one_based():
    inst = Instance((MnlModel((1.0, 1.0)), MnlModel((1.0, 1.0))), (UniformModel(1.0), PopularModel(1, 2)))
    obj = instance_to_json(inst)
    assert obj["suppliers"][1] == {"kind": "popular", "popular_index": 2, "m": 2}
    assert validate(instance_from_json(obj)) == []
    fam = AssortmentFamily(((0, 1),))
    assert fam.to_json() == {"menus": [[1, 2]]}
    assert AssortmentFamily.from_json(fam.to_json()) == fam


def test_family_file_and_default_revenues(tmp_path):
    p = tmp_path / "fam.json"
    p.write_text(json.dumps({"menus": [[2], []]}))
    assert load_family(p).menus == ((1,), ())
    obj = instance_to_json(two_by_two())
    del obj["revenues"]
    assert instance_from_json(json.loads(dumps(obj))).revenues == (1.0, 1.0)


def test_json_count_mismatch_rejected():
    obj = instance_to_json(two_by_two())
    obj["n"] = 3
    with pytest.raises(ValueError):
        instance_from_json(obj)
