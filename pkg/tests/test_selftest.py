import pytest

from walras.selftest import (
    ALL_SUITES,
    PREMISE_DEPENDENT,
    PREMISE_FREE,
    SuiteResult,
    instance_digest,
    run_selftest,
    run_suite,
)


def test_suite_result_keeps_first_counterexample():
    res = SuiteResult("demo")
    assert res.tally(True)
    assert not res.tally(False)
    res.witness("first", price=[0])
    res.witness("second", price=[1])
    assert (res.checks, res.failures) == (2, 1)
    assert res.counterexample == {"operation": "first", "price": [0]}
    assert res.to_dict()["status"] == "fail"


def test_digest_is_stable(e1, u1):
    assert instance_digest(e1) == instance_digest(e1)
    assert instance_digest(e1) != instance_digest(u1)
    assert len(instance_digest(e1)) == 16


@pytest.mark.parametrize("name", ["e1", "u1", "z0"])
def test_gross_substitute_fixtures_pass_every_suite(name, request):
    report = run_selftest(request.getfixturevalue(name))
    assert report.premise_holds
    assert [s.name for s in report.suites] == list(ALL_SUITES)
    assert report.failed == []
    assert report.passed


def test_complements_skip_premise_dependent_suites(x1):
    report = run_selftest(x1)
    assert not report.premise_holds
    assert report.premise_witness["bidder"] == 0
    assert report.skipped == list(PREMISE_DEPENDENT)
    assert all(report.suite(n).passed for n in PREMISE_FREE)
    assert not report.passed
    assert report.to_dict()["gs_premise"] is False


def test_selected_suites(e1):
    report = run_selftest(e1, suites=["weak-duality", "duality"])
    assert [s.name for s in report.suites] == ["weak-duality", "duality"]
    assert report.passed
    with pytest.raises(ValueError):
        run_selftest(e1, suites=["no-such-suite"])


def test_check_cap_and_trusted_kinds(e1):
    capped = run_selftest(e1, suites=["lattice"], check_cap=1)
    assert not capped.premise_holds
    assert capped.suite("lattice").skipped
    trusted = run_selftest(e1, suites=["lattice"], check_cap=1, trust_kinds=True)
    assert trusted.premise_holds and trusted.passed


def test_single_suite(u1):
    result = run_suite(u1, "ascending-framework")
    assert result.passed
    assert result.checks > 0
