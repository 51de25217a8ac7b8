"""
Property tests over small random additive / unit-demand auctions.
"""

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from walras.auction import Policy, run_ascending, run_descending
from walras.demand import requirement
from walras.equilibrium import characterize, is_walrasian, max_welfare, walrasian_bounds, walrasian_set
from walras.instance import all_sets, make_additive, make_instance, make_unit_demand, raise_prices
from walras.lyapunov import delta_up, grid_minimize_lyapunov, lyapunov_value

PROPERTY_SETTINGS = dict(
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)


@st.composite
def instances(draw, max_items=2, max_bidders=3, max_value=2):
    m = draw(st.integers(min_value=1, max_value=max_items))
    n = draw(st.integers(min_value=1, max_value=max_bidders))
    bidders = []
    for _ in range(n):
        values = draw(st.lists(st.integers(min_value=0, max_value=max_value), min_size=m, max_size=m))
        make = draw(st.sampled_from([make_additive, make_unit_demand]))
        bidders.append(make(values))
    return make_instance(bidders)


@st.composite
def priced_instances(draw):
    inst = draw(instances())
    p = tuple(draw(st.integers(min_value=0, max_value=inst.grid_bound)) for _ in range(inst.m))
    return inst, p


@given(instances(max_items=3, max_value=4))
@settings(**PROPERTY_SETTINGS)
def test_marginal_values_stay_within_vmax(inst):
    for v in inst.bidders:
        for s in all_sets(inst.m):
            for j in range(inst.m):
                assert 0 <= v.marginal(s, j) <= inst.vmax


@given(instances())
@settings(**PROPERTY_SETTINGS)
def test_lyapunov_minimizers_are_walrasian(inst):
    minimum = grid_minimize_lyapunov(inst)
    assert minimum.min_value == max_welfare(inst)[0]
    assert list(minimum.minimizers) == walrasian_set(inst)


@given(instances(), st.sampled_from(["minimal-minimizer", "lex-first", "random", "largest"]))
@settings(**PROPERTY_SETTINGS)
def test_auctions_reach_extreme_equilibria(inst, policy):
    bounds = walrasian_bounds(inst)
    up = run_ascending(inst, Policy.parse(policy, seed=1))
    down = run_descending(inst, Policy.parse(policy, seed=1))
    assert up.final_price == bounds.minimum
    assert down.final_price == bounds.maximum
    assert all(r.lyapunov_after < r.lyapunov_before for r in up.rounds + down.rounds)


@given(priced_instances())
@settings(**PROPERTY_SETTINGS)
def test_characterization_matches_allocation_search(case):
    inst, p = case
    verdict = characterize(inst, p)
    assert verdict.is_walrasian == (is_walrasian(inst, p) is not None)
    if verdict.is_walrasian:
        bounds = walrasian_bounds(inst)
        assert verdict.is_min_walrasian == (p == bounds.minimum)
        assert verdict.is_max_walrasian == (p == bounds.maximum)


@given(priced_instances())
@settings(**PROPERTY_SETTINGS)
def test_lyapunov_step_formula(case):
    inst, p = case
    base = lyapunov_value(inst, p)
    for s in all_sets(inst.m):
        check = delta_up(inst, p, s)
        assert check.agrees
        if s == 0:
            assert check.actual == base


@given(priced_instances())
@settings(**PROPERTY_SETTINGS)
def test_requirement_grows_when_other_prices_rise(case):
    inst, p = case
    full = (1 << inst.m) - 1
    for v in inst.bidders:
        for s in all_sets(inst.m, nonempty=True):
            rest = full & ~s
            if rest:
                assert requirement(v, raise_prices(p, rest), s) >= requirement(v, p, s)


@pytest.mark.parametrize("values", [[0, 0], [2, 2], [1, 0]])
def test_single_bidder_pays_nothing_at_the_minimum(values):
    inst = make_instance([make_additive(values)])
    assert walrasian_bounds(inst).minimum == (0, 0)
