import numpy as np
import pytest

from walras.demand import (
    DemandClass,
    classify_set,
    configure_demand_cache,
    demand_sets,
    difference_bounds,
    dual_gs_check,
    enumerate_class,
    gs_premise,
    is_gross_substitute,
    is_gross_substitute_by_definition,
    is_submodular,
    max_utility,
    non_gs_configuration,
    nontrivial_weakly_over_demanded,
    nontrivial_weakly_under_demanded,
    redundant,
    require_gross_substitute,
    requirement,
    single_improvement,
    utility,
    utility_matrix,
)
from walras.errors import CapExceededError, PreconditionError, PremiseError
from walras.instance import make_additive, make_table, make_unit_demand


# -------------------- Demand --------------------
def test_utility_matrix_rows():
    v = make_additive([1, 1])
    util = utility_matrix(v, np.array([[0, 0], [1, 1]]))
    assert util.tolist() == [[0, 1, 1, 2], [0, 0, 0, 0]]


def test_demand_sets(e1):
    v = e1.bidders[0]
    assert demand_sets(v, (0, 0)).sets == (3,)
    assert max_utility(v, (0, 0)) == 2
    assert demand_sets(v, (1, 1)).sets == (0, 1, 2, 3)
    assert max_utility(v, (1, 1)) == 0
    assert utility(v, (2, 0), 1) == -1


def test_demand_cache_resize(u1):
    configure_demand_cache(16)
    try:
        assert demand_sets(u1.bidders[0], (2, 2)).sets == (0, 1)
    finally:
        configure_demand_cache(65536)


def test_requirement_and_redundant(e1):
    v = e1.bidders[0]
    assert requirement(v, (1, 1), 3) == 0
    assert redundant(v, (1, 1), 3) == 2
    assert requirement(v, (0, 0), 1) == 1


# -------------------- Over / under demand --------------------
def test_classify_single_item_at_zero(e1):
    c = classify_set(e1, (0, 0), 1)
    assert (c.requirement, c.redundant, c.size) == (3, 3, 1)
    assert c.od and c.wod and not c.ud and not c.wud
    assert c.to_dict()["flags"] == ["OD", "WOD"]


def test_classify_full_set_at_equilibrium(e1):
    c = classify_set(e1, (1, 1), 3)
    assert (c.requirement, c.redundant) == (0, 6)
    assert c.flags == frozenset()


def test_enumerate_class(e1, u1):
    assert enumerate_class(e1, (1, 1), DemandClass.WUD) == [0]
    assert enumerate_class(u1, (2, 2), DemandClass.UD) == [2]
    assert enumerate_class(e1, (0, 0), "OD") == [1, 2, 3]


def test_nontrivial_weak_sets_need_lowerable_prices(z0):
    assert nontrivial_weakly_under_demanded(z0, (0, 0)) == []
    assert nontrivial_weakly_over_demanded(z0, (0, 0)) == []
    assert nontrivial_weakly_under_demanded(z0, (1, 1)) == [1, 2, 3]


def test_no_nontrivial_weak_sets_at_equilibrium(e1):
    assert nontrivial_weakly_under_demanded(e1, (1, 1)) == []
    assert nontrivial_weakly_over_demanded(e1, (1, 1)) == []


# -------------------- Gross substitutes --------------------
@pytest.mark.parametrize("v", [make_additive([1, 2]), make_unit_demand([2, 1]), make_unit_demand([3, 0, 2])])
def test_gs_holds_for_additive_and_unit_demand(v):
    assert is_gross_substitute(v).holds
    assert is_gross_substitute(v, condition=1).holds


def test_gs_witness_for_complements(x1):
    check = is_gross_substitute(x1.bidders[0])
    assert not check.holds
    w = check.witness
    assert (w.price, w.set, w.lhs, w.rhs, w.condition) == ((1, 1), 3, 1, 2, 2)
    assert check.to_dict()["witness"]["set"] == "{a,b}"


def test_gs_check_preconditions():
    with pytest.raises(PreconditionError):
        is_gross_substitute(make_table([0, 2, 1, 1], strict=False))
    with pytest.raises(CapExceededError):
        is_gross_substitute(make_additive([1] * 6), check_cap=5)
    with pytest.raises(PreconditionError):
        is_gross_substitute(make_additive([1, 1]), condition=3)


def test_premise(e1, x1):
    require_gross_substitute(e1)
    assert all(c.points == 0 for c in gs_premise(e1, trust_kinds=True))
    with pytest.raises(PremiseError) as err:
        require_gross_substitute(x1)
    assert err.value.bidder == 0
    assert err.value.witness.price == (1, 1)


def test_dual_gs_check(e1):
    assert dual_gs_check(e1.bidders[0], (1, 1), 1) == (0, 0)
    with pytest.raises(PreconditionError):
        dual_gs_check(e1.bidders[0], (0, 0), 1)


def test_difference_bounds_hold_for_complements(x1):
    v = x1.bidders[0]
    bounds = difference_bounds(v, (0, 0), 3)
    assert bounds.raise_holds and bounds.lower_holds is None
    assert difference_bounds(v, (1, 1), 3).lower_holds


def test_definition_check(e1, x1):
    assert is_gross_substitute_by_definition(e1.bidders[0]) is None
    assert is_gross_substitute_by_definition(x1.bidders[0]) is not None


def test_submodularity_of_valuations(x1):
    assert is_submodular(make_additive([1, 2])) is None
    assert is_submodular(make_unit_demand([2, 1])) is None
    assert is_submodular(x1.bidders[0]) == (1, 2)


def test_single_improvement(x1):
    v = x1.bidders[0]
    assert single_improvement(v, (0, 0), 0) == 1
    with pytest.raises(PreconditionError):
        single_improvement(v, (0, 0), 3)


def test_non_gs_configuration_near_misses(x1):
    search = non_gs_configuration(x1.bidders[0])
    assert not search.found
    first = search.near_misses[0]
    assert first.price == (1, 2)
    assert first.form == 1
    assert first.collection == (0, 3)
    with pytest.raises(PreconditionError):
        non_gs_configuration(make_additive([1]))


def test_worked_values(e1, x1):
    v = e1.bidders[0]
    assert demand_sets(v, (1, 0)).sets == (2, 3)
    assert (requirement(v, (1, 1), 1), redundant(v, (1, 1), 1)) == (0, 1)
    assert classify_set(e1, (1, 0), 1).redundant == 3
    assert dual_gs_check(v, (1, 1), 3) == (0, 0)
    assert single_improvement(v, (1, 0), 1) == 2
    assert single_improvement(x1.bidders[0], (1, 1), 1) == 3
