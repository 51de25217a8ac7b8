import pytest

from walras.equilibrium import (
    characterize,
    is_envy_free,
    is_walrasian,
    lattice_check,
    max_walrasian,
    max_welfare,
    min_walrasian,
    walrasian_bounds,
    walrasian_set,
)
from walras.errors import NoEquilibriumError, PreconditionError, PremiseError
from walras.instance import make_additive, make_instance
from walras.lyapunov import grid_minimize_lyapunov


# -------------------- Welfare and allocations --------------------
def test_max_welfare(e1, u1):
    value, allocation = max_welfare(e1)
    assert value == 2
    assert allocation.bundles == (3, 0, 0)
    assert allocation.is_partition
    value, allocation = max_welfare(u1)
    assert value == 3
    assert allocation.bundles == (1, 2)


def test_max_welfare_breaks_ties_item_major():
    inst = make_instance([make_additive([1, 0]), make_additive([1, 1])])
    value, allocation = max_welfare(inst)
    assert value == 2
    assert allocation.bundles == (1, 2)


def test_walrasian_certificate(e1):
    cert = is_walrasian(e1, (1, 1))
    assert cert is not None
    assert cert.allocation.bundles == (0, 0, 3)
    assert cert.welfare == 2
    assert cert.to_dict()["allocation"]["bundles"] == ["{}", "{}", "{a,b}"]
    assert is_walrasian(e1, (0, 0)) is None


def test_envy_free_allows_unsold_items(e1):
    assert is_envy_free(e1, (0, 0)) is None
    allocation = is_envy_free(e1, (2, 1))
    assert allocation.bundles == (0, 0, 0)
    assert not allocation.is_partition


# -------------------- Walrasian set --------------------
def test_walrasian_sets(e1, u1, z0):
    assert walrasian_set(e1) == [(1, 1)]
    assert walrasian_set(u1) == [(1, 0), (2, 1)]
    assert walrasian_set(z0) == [(0, 0)]


def test_walrasian_set_matches_lyapunov_minimizers(e1, u1):
    for inst in (e1, u1):
        assert walrasian_set(inst) == list(grid_minimize_lyapunov(inst).minimizers)


def test_walrasian_value_equals_max_welfare(u1):
    best, _ = max_welfare(u1)
    assert all(is_walrasian(u1, p).welfare == best for p in walrasian_set(u1))


def test_complements_still_have_an_equilibrium_at_zero(x1):
    assert (0, 0) in walrasian_set(x1)


def test_bounds(u1):
    bounds = walrasian_bounds(u1)
    assert (bounds.minimum, bounds.maximum, bounds.count) == ((1, 0), (2, 1), 2)
    assert bounds.min_closed and bounds.max_closed
    assert min_walrasian(u1) == (1, 0)
    assert max_walrasian(u1) == (2, 1)


def test_bounds_without_equilibrium(e1):
    with pytest.raises(NoEquilibriumError):
        walrasian_bounds(e1, prices=[])


def test_lattice(u1):
    check = lattice_check(u1, (1, 0), (2, 1))
    assert check.holds
    assert (check.meet, check.join) == ((1, 0), (2, 1))
    with pytest.raises(PreconditionError):
        lattice_check(u1, (1, 1), (1, 0))


# -------------------- Characterization --------------------
def test_characterize_e1(e1):
    verdict = characterize(e1, (0, 0))
    assert not verdict.is_walrasian
    assert (verdict.evidence.set, verdict.evidence.cls.value) == (1, "OD")
    verdict = characterize(e1, (1, 1))
    assert verdict.is_walrasian and verdict.is_min_walrasian and verdict.is_max_walrasian
    assert verdict.to_dict()["evidence"] == "none"


def test_characterize_u1(u1):
    low = characterize(u1, (1, 0))
    assert low.is_walrasian and low.is_min_walrasian and not low.is_max_walrasian
    assert (low.max_evidence.set, low.max_evidence.cls.value) == (3, "WOD")

    high = characterize(u1, (2, 1))
    assert high.is_max_walrasian and not high.is_min_walrasian
    assert (high.min_evidence.set, high.min_evidence.cls.value) == (3, "WUD")

    outside = characterize(u1, (1, 1))
    assert not outside.is_walrasian
    assert outside.evidence.set == 1


def test_characterize_zero_prices_are_minimal(z0):
    verdict = characterize(z0, (0, 0))
    assert verdict.is_walrasian and verdict.is_min_walrasian and verdict.is_max_walrasian


def test_characterize_needs_gross_substitutes(x1):
    with pytest.raises(PremiseError):
        characterize(x1, (0, 0))
    assert characterize(x1, (0, 0), force=True).forced


@pytest.mark.parametrize("p", [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 0)])
def test_characterize_agrees_with_search(u1, p):
    assert characterize(u1, p).is_walrasian == (is_walrasian(u1, p) is not None)
