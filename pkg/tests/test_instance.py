import pytest

from walras.errors import CapExceededError, InstanceError, MonotonicityError, PreconditionError
from walras.instance import (
    Instance,
    ValuationKind,
    format_set,
    join,
    load_instance,
    lower_prices,
    make_additive,
    make_instance,
    make_table,
    make_unit_demand,
    meet,
    parse_instance,
    parse_price,
    parse_set,
    raise_prices,
    require_well_formed,
    serialize_instance,
    submasks,
    validate,
)


# -------------------- Sets and prices --------------------
def test_submasks_ascending():
    assert list(submasks(0b101)) == [0, 1, 4, 5]
    assert list(submasks(0b101, nonempty=True)) == [1, 4, 5]


def test_set_text_forms():
    assert parse_set("a,b", 2) == 3
    assert parse_set("{b}", 2) == 2
    assert parse_set("1", 2) == 2
    assert parse_set("{}", 2) == 0
    assert format_set(3) == "{a,b}"
    assert format_set(0) == "{}"
    assert format_set(1, ["x", "y"]) == "{x}"


def test_parse_set_rejects_unknown_items():
    with pytest.raises(InstanceError):
        parse_set("c", 2)
    with pytest.raises(InstanceError):
        parse_set("5", 2)


def test_price_moves():
    assert raise_prices((0, 1), 0b01) == (1, 1)
    assert lower_prices((1, 1), 0b11) == (0, 0)
    with pytest.raises(PreconditionError):
        lower_prices((0, 1), 0b01)
    assert meet((2, 0), (1, 1)) == (1, 0)
    assert join((2, 0), (1, 1)) == (2, 1)


def test_parse_price():
    assert parse_price("1,0", 2) == (1, 0)
    assert parse_price("[2, 1]", 2) == (2, 1)
    with pytest.raises(InstanceError):
        parse_price("1", 2)
    with pytest.raises(InstanceError):
        parse_price("-1,0", 2)
    with pytest.raises(InstanceError):
        parse_price("x,0", 2)


# -------------------- Valuations --------------------
def test_additive_table():
    v = make_additive([1, 2])
    assert v.values == (0, 1, 2, 3)
    assert v.kind is ValuationKind.ADDITIVE
    assert v.grand_value == 3


def test_unit_demand_table():
    v = make_unit_demand([2, 1])
    assert v.values == (0, 2, 1, 2)
    assert v.item_values == (2, 1)


def test_table_strict_rejects_non_monotone():
    with pytest.raises(MonotonicityError) as err:
        make_table([0, 2, 1, 1])
    assert err.value.witness == (1, 3)


def test_marginal_values(x1):
    v = x1.bidders[0]
    assert [v.marginal(0, 0), v.marginal(2, 0), v.marginal(1, 1)] == [1, 2, 2]
    assert v.marginal(3, 0) == 0
    assert make_table([0, 2, 1, 1], strict=False).marginal(1, 1) == -1


def test_table_strict_rejects_non_normalized():
    with pytest.raises(InstanceError):
        make_table([1, 1, 1, 1])


def test_table_length_must_be_power_of_two():
    with pytest.raises(InstanceError):
        make_table([0, 1, 1])


def test_item_cap():
    with pytest.raises(CapExceededError):
        make_additive([1] * 17)


def test_bidder_cap():
    with pytest.raises(CapExceededError):
        make_instance([make_additive([1])] * 17)


def test_mixed_item_counts_rejected():
    with pytest.raises(InstanceError):
        Instance(2, (make_additive([1, 1]), make_additive([1])))


def test_instance_grid_bound(e1, u1, z0):
    assert e1.vmax == 2 and e1.grid_bound == 3
    assert u1.vmax == 2
    assert z0.vmax == 0 and list(z0.grid()) == [(0, 0), (0, 1), (1, 0), (1, 1)]


# -------------------- Documents --------------------
def test_fixture_files_match_builtins(fixture_path, e1, u1, x1):
    assert load_instance(fixture_path("E1")).bidders == e1.bidders
    assert load_instance(fixture_path("U1")).bidders == u1.bidders
    assert load_instance(fixture_path("X1")).bidders == x1.bidders


def test_serialized_instance_parses_back(u1):
    assert parse_instance(serialize_instance(u1)) == u1


@pytest.mark.parametrize(
    "text",
    [
        '{"m": 2, "bidders": [{"kind": "additive", "values": [1, 1]}], "extra": 1}',
        '{"m": 2, "bidders": [{"kind": "additive", "values": [1, -1]}]}',
        '{"m": 2, "bidders": [{"kind": "magic", "values": [1, 1]}]}',
        '{"m": 2, "bidders": [{"kind": "additive", "values": [1]}]}',
        '{"m": 2, "bidders": [{"kind": "table", "values": [0, 1, 1]}]}',
        '{"m": 2, "bidders": []}',
        "not json",
    ],
)
def test_malformed_documents(text):
    with pytest.raises(InstanceError):
        parse_instance(text)


def test_item_cap_in_document():
    with pytest.raises(CapExceededError):
        parse_instance('{"m": 20, "bidders": []}')


def test_validate_reports_non_monotone_table():
    inst = parse_instance('{"m": 2, "bidders": [{"kind": "table", "values": [0, 2, 1, 1]}]}', strict=False)
    report = validate(inst)
    assert not report.well_formed
    assert report.violations[0].kind == "monotonicity"
    assert report.violations[0].witness == (1, 3)
    with pytest.raises(MonotonicityError):
        require_well_formed(inst)


def test_validate_well_formed(e1):
    report = validate(e1)
    assert report.well_formed
    assert report.to_dict()["grid_bound"] == 3
