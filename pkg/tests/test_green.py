import math

import pytest

from crsphere.errors import DomainError, SingularityError
from crsphere.green import LaplaceQuery, green_conformal, green_conformal_array, laplace_lhs, laplace_rhs
from crsphere.subriemannian import CylCoord


def test_closed_form_examples():
    assert green_conformal(CylCoord(1, math.pi / 3, math.pi / 2)) == pytest.approx(
        1 / (4 * math.pi * math.sqrt(5)), rel=1e-15)
    assert green_conformal(CylCoord(1, math.pi / 2 - 1e-9, 0.7)) == pytest.approx(1 / (8 * math.pi), rel=1e-8)


def test_pole():
    with pytest.raises(SingularityError):
        green_conformal(CylCoord(2, 0.0, 0.0))
    with pytest.raises(SingularityError):
        LaplaceQuery(CylCoord(1, 0.0, 0.0), 0.0)
    assert math.isinf(green_conformal_array(1, 0.0, 0.0))


def test_lambda_domain():
    with pytest.raises(DomainError):
        LaplaceQuery(CylCoord(1, 0.5, 0.5), -1.0)
    with pytest.raises(DomainError):
        LaplaceQuery(CylCoord(1, 0.5, 0.5), 2j)
    with pytest.raises(DomainError):
        laplace_lhs(LaplaceQuery(CylCoord(1, 0.5, 0.5), 0.0))


@pytest.mark.parametrize("n,r,theta", [(1, 0.6, 1.0), (3, 0.8, 2.0), (2, 0.1, 0.05), (1, 0.0, 0.3), (2, 1.4, -3.0)])
def test_rhs_at_zero_is_closed_form(n, r, theta):
    c = CylCoord(n, r, theta)
    assert laplace_rhs(LaplaceQuery(c, 0.0)) == pytest.approx(green_conformal(c), abs=1e-8, rel=1e-12)


@pytest.mark.parametrize("n,r,theta,lam", [(1, 0.6, 1.0, 1.0), (2, 1.0, 0.0, 0.5), (1, 0.3, -2.0, 0.25),
                                           (2, 1.2, 2.5, 4.0)])
def test_both_sides_agree(n, r, theta, lam):
    q = LaplaceQuery(CylCoord(n, r, theta), lam)
    assert laplace_lhs(q) == pytest.approx(laplace_rhs(q), rel=1e-8)


def test_small_lambda_approaches_green():
    c = CylCoord(1, 0.6, 1.0)
    lhs = laplace_lhs(LaplaceQuery(c, 0.01))
    assert lhs == pytest.approx(laplace_rhs(LaplaceQuery(c, 0.01)), rel=1e-8)
    assert abs(lhs - green_conformal(c)) <= 1e-2


def test_limit_is_monotone():
    for c in (CylCoord(2, 0.5, 1.0), CylCoord(1, 0.6, 1.0)):
        g = green_conformal(c)
        gaps = [abs(laplace_rhs(LaplaceQuery(c, lam)) - g) for lam in (1e-1, 1e-2, 1e-3)]
        assert gaps[0] > gaps[1] > gaps[2]


def test_green_at_tiny_lambda():
    c = CylCoord(2, 0.5, 1.0)
    assert laplace_rhs(LaplaceQuery(c, 1e-4)) == pytest.approx(green_conformal(c), rel=2e-3)


def test_complex_lambda_smoke():
    q = LaplaceQuery(CylCoord(1, 0.6, 1.0), 1 + 1j)
    lhs, rhs = laplace_lhs(q), laplace_rhs(q)
    assert isinstance(rhs, complex)
    assert lhs == pytest.approx(rhs, rel=1e-8)
