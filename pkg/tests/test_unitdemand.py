import pytest

from walras.errors import PreconditionError
from walras.unitdemand import (
    andersson_excess,
    compare_with_general,
    item_demand,
    lambda_set,
    mt_over_demanded,
    mt_under_demanded,
    xi_set,
)


def test_item_demand(u1, z0):
    first = item_demand(u1, (0, 0)).per_bidder[0]
    assert (first.demanded_items, first.outside_option) == (1, False)
    tied = item_demand(u1, (2, 1)).per_bidder[0]
    assert (tied.demanded_items, tied.outside_option) == (3, True)
    zero = item_demand(z0, (0, 0)).per_bidder[0]
    assert (zero.demanded_items, zero.outside_option) == (3, True)


def test_priced_out_bidder_demands_nothing(u1):
    bidder = item_demand(u1, (3, 2)).per_bidder[0]
    assert (bidder.demanded_items, bidder.outside_option) == (0, True)


def test_requires_unit_demand(e1):
    with pytest.raises(PreconditionError):
        item_demand(e1, (0, 0))
    with pytest.raises(PreconditionError):
        compare_with_general(e1, (0, 0))


def test_lambda_and_xi(u1):
    assert lambda_set(u1, (0, 0), 1) == frozenset({0, 1})
    assert xi_set(u1, (0, 0), 1) == frozenset({0, 1})
    assert xi_set(u1, (0, 0), 2) == frozenset()
    assert lambda_set(u1, (0, 0), 2) == frozenset()


def test_printed_definitions(u1):
    assert mt_over_demanded(u1, (0, 0), 3)
    assert mt_over_demanded(u1, (0, 0), 0)
    assert mt_under_demanded(u1, (0, 0), 2)
    assert not mt_under_demanded(u1, (0, 0), 1)


def test_andersson_excess(u1):
    assert andersson_excess(u1, (0, 0), 1)
    assert not andersson_excess(u1, (0, 0), 3)
    assert not andersson_excess(u1, (0, 0), 0)


def test_comparison_report(u1):
    report = compare_with_general(u1, (0, 0))
    rows = {r.set: r for r in report.rows}
    assert rows[3].mt_over and not rows[3].od
    assert rows[2].mt_under and not rows[2].ud
    assert rows[1].andersson and rows[1].ed
    assert rows[1].disagreements == []
    assert report.disagreement_count == {"mt_over/OD": 2, "mt_under/UD": 3, "andersson/ED": 0}


def test_comparison_exports(u1):
    report = compare_with_general(u1, (0, 0))
    lines = report.to_csv().splitlines()
    assert lines[0] == "set,mt_over,od,mt_under,ud,andersson,ed"
    assert len(lines) == 5
    data = report.to_dict()
    assert data["price"] == [0, 0]
    assert data["rows"][1]["set"] == "{a}"
    assert data["notes"]
