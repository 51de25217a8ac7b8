import numpy as np
import pytest

from walras.errors import PreconditionError
from walras.lyapunov import (
    delta_down,
    delta_up,
    grid_minimize_lyapunov,
    lyapunov,
    lyapunov_grid_values,
    lyapunov_value,
    scan_submodularity,
    submodularity_check,
)


def test_values_on_e1(e1):
    assert lyapunov_value(e1, (0, 0)) == 6
    assert lyapunov_value(e1, (1, 0)) == 4
    assert lyapunov_value(e1, (1, 1)) == 2


def test_report_breakdown(u1):
    report = lyapunov(u1, (1, 0))
    assert report.per_bidder_utilities == (1, 1)
    assert report.price_mass == 1
    assert report.value == 3
    assert report.to_dict()["value"] == 3


@pytest.mark.parametrize(
    "p, expected",
    [((0, 0), 4), ((1, 0), 3), ((2, 1), 3), ((1, 1), 4), ((2, 0), 4), ((2, 2), 4)],
)
def test_values_on_u1(u1, p, expected):
    assert lyapunov_value(u1, p) == expected


def test_vectorized_values_match(e1, u1):
    prices = np.array([[0, 0], [1, 0], [1, 1]])
    assert lyapunov_grid_values(e1, prices).tolist() == [6, 4, 2]
    assert lyapunov_grid_values(u1, prices).tolist() == [4, 3, 4]


def test_delta_up(e1):
    full = delta_up(e1, (0, 0), 3)
    assert (full.predicted, full.actual) == (2, 2)
    single = delta_up(e1, (0, 0), 1)
    assert single.agrees and single.actual == 4


def test_delta_down(e1):
    check = delta_down(e1, (1, 1), 1)
    assert (check.predicted, check.actual) == (4, 4)
    with pytest.raises(PreconditionError):
        delta_down(e1, (0, 0), 1)


def test_submodularity(e1):
    check = submodularity_check(e1, (1, 0), (0, 1))
    assert (check.lhs_meet_join, check.rhs_sum) == (8, 8)
    assert check.holds
    checked, violation = scan_submodularity(e1)
    assert checked == 136
    assert violation is None


def test_sampled_submodularity(u1):
    checked, violation = scan_submodularity(u1, sample=20, seed=3)
    assert checked == 20
    assert violation is None


def test_grid_minimum(e1, u1, z0):
    assert grid_minimize_lyapunov(e1).minimizers == ((1, 1),)
    assert grid_minimize_lyapunov(e1).min_value == 2
    result = grid_minimize_lyapunov(u1, progress=False)
    assert result.min_value == 3
    assert result.minimizers == ((1, 0), (2, 1))
    assert grid_minimize_lyapunov(z0).to_dict() == {"min_value": 0, "minimizers": [[0, 0]]}


def test_grid_minimum_single_chunk_ignores_jobs(e1):
    assert grid_minimize_lyapunov(e1, jobs=2).minimizers == ((1, 1),)


def test_submodularity_on_opposite_corners(e1):
    check = submodularity_check(e1, (2, 0), (0, 2))
    assert (check.lhs_meet_join, check.rhs_sum) == (10, 10)
    same = submodularity_check(e1, (1, 0), (1, 0))
    assert same.lhs_meet_join == same.rhs_sum


def test_empty_move_changes_nothing(u1):
    check = delta_up(u1, (2, 1), 0)
    assert check.predicted == check.actual == 3
