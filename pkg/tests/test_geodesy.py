import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crsphere.errors import DomainError
from crsphere.geodesy import (
    asym_coefficients,
    asym_cut_locus,
    asym_diag,
    asym_interior,
    distance,
    distance_case2,
    extrapolate_exponent,
    phi_residual,
    prefactor_power,
    small_time_kernel,
    solve_phi,
)
from crsphere.riemannian import Truncation
from crsphere.subriemannian import CylCoord, p_spectral


def riemannian_distance(r, theta):
    return math.acos(max(-1.0, min(1.0, math.cos(r) * math.cos(theta))))


def test_cut_locus_closed_form():
    for th in (0.3, 1.0, -2.0, math.pi):
        assert distance(CylCoord(1, 0.0, th)) ** 2 == pytest.approx(2 * math.pi * abs(th) - th * th, rel=1e-15)
    assert distance(CylCoord(1, 0.0, math.pi / 2)) == pytest.approx(math.pi * math.sqrt(3) / 2)
    g = solve_phi(CylCoord(2, 0.0, math.pi))
    assert g.dist == pytest.approx(math.pi) and g.regime == "cut_locus"


def test_diagonal_and_theta_zero_seam():
    assert solve_phi(CylCoord(1, 0.0, 0.0)).regime == "diagonal"
    assert distance(CylCoord(1, 0.7, 1e-12)) == pytest.approx(0.7, abs=1e-12)
    for r in (0.3, 0.7, 1.2):
        # just above the seam the root finder is used; the two sides must join
        assert distance(CylCoord(1, r, 2e-8)) == pytest.approx(r, abs=1e-6)
        assert distance(CylCoord(1, r, 1e-5)) == pytest.approx(r, abs=1e-4)


def test_r_seam_joins_cut_locus():
    th = 1.3
    inner = distance(CylCoord(1, 1e-9, th))
    outer = distance(CylCoord(1, 1e-5, th))
    assert outer == pytest.approx(inner, abs=1e-4)


@settings(max_examples=80, deadline=None)
@given(r=st.floats(1e-3, 1.55), theta=st.floats(-math.pi, math.pi))
def test_phi_equation_and_bounds(r, theta):
    g = solve_phi(CylCoord(1, r, theta))
    assert -math.pi <= g.phi <= math.pi
    # rounding in arccos(u)/sqrt(1-u^2) grows like 1/sin r
    assert abs(phi_residual(r, theta, g.phi)) <= 1e-12 / math.sin(r)
    assert g.dist <= math.pi + 1e-12
    assert g.dist >= riemannian_distance(r, theta) - 1e-12
    assert g.hessian > 0


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.05, 1.5), theta=st.floats(0.05, 3.0))
def test_equivalent_distance_forms(r, theta):
    g = solve_phi(CylCoord(1, r, theta))
    if abs(math.sin(g.phi)) > 1e-3:
        assert distance_case2(r, theta, g.phi) == pytest.approx(g.dist ** 2, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0, 1.5), theta=st.floats(0, math.pi))
def test_distance_even_in_theta(r, theta):
    assert distance(CylCoord(1, r, theta)) == pytest.approx(distance(CylCoord(1, r, -theta)), abs=1e-12)


def test_diameter_on_grid():
    rs = np.linspace(0, math.pi / 2, 30, endpoint=False)
    ths = np.linspace(-math.pi, math.pi, 31)
    best = max(distance(CylCoord(1, float(r), float(t))) for r in rs for t in ths)
    assert best == pytest.approx(math.pi, abs=1e-12)


def test_A1_closed_form():
    assert asym_coefficients(1).A_n == pytest.approx(math.pi ** 2 / 2, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_A_n_independent_rule(n):
    # tanh-sinh quadrature in mpmath as a second rule
    with mpmath.workdps(30):
        ref = 2 * mpmath.quad(lambda y: (y / mpmath.sinh(y)) ** n if y else 1, [0, 5, 20, mpmath.inf])
    assert asym_coefficients(n).A_n == pytest.approx(float(ref), abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_B_n_matches_spectral_diagonal(n):
    """The first-order coefficient read off the spectral kernel at shrinking t."""
    c = asym_coefficients(n)
    est = []
    for t in (0.02, 0.01):
        p = p_spectral(CylCoord(n, 0.0, 0.0), t, Truncation(max_terms=20000, abs_tol=1e-10)).value
        est.append(((4 * math.pi * t) ** (n + 1) * p - c.A_n) / t)
    # linear extrapolation in t removes the O(t) term
    assert 2 * est[1] - est[0] == pytest.approx(c.B_n, rel=2e-3)


def test_B_1_equals_A_1():
    c = asym_coefficients(1)
    assert c.B_n == pytest.approx(c.A_n, rel=1e-13)


@pytest.mark.parametrize("n", [1, 2])
def test_diagonal_ratio_tends_to_one(n):
    errs = []
    for t in (0.05, 0.03, 0.02):
        p = p_spectral(CylCoord(n, 0.0, 0.0), t, Truncation(max_terms=20000)).value
        errs.append(abs(p / asym_diag(n, t) - 1))
    assert errs[0] < 5e-2
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("r,theta", [(0.0, 1.5), (0.8, 0.0), (0.8, 1.0), (1.2, -0.7)])
def test_leading_term_ratios_approach_one(n, r, theta):
    c = CylCoord(n, r, theta)
    ratios = [p_spectral(c, t).value / small_time_kernel(c, t).value for t in (0.1, 0.05)]
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1)
    assert abs(ratios[1] - 1) < 0.2


def mp_cut_locus_kernel(n, t, theta):
    """``p_t(0, theta)`` summed in mpmath with enough digits to resolve ``e^{-d^2/4t}``.

    At ``r = 0`` the Jacobi factor is ``C(m+n-1, m)`` and ``cos^k r = 1``.
    """
    e = (2 * math.pi * theta - theta * theta) / (4 * t)
    with mpmath.workdps(int(e / 2.3) + 30):
        tm, total = mpmath.mpf(t), mpmath.mpf(0)
        K = int((e + 60) / (2 * n * t)) + 10
        M = int(math.sqrt((e + 60) / (4 * t))) + 5
        for k in range(K):
            s = mpmath.mpf(0)
            b1, b2 = mpmath.binomial(k + n - 1, n - 1), mpmath.mpf(1)
            for m in range(M):
                lam = 4 * m * (m + k + n) + 2 * k * n
                s += (2 * m + k + n) * b1 * b2 * mpmath.exp(-lam * tm)
                b1 = b1 * (m + k + n) / (m + k + 1)
                b2 = b2 * (m + n) / (m + 1)
            total += (2 if k else 1) * s * mpmath.cos(k * theta)
        return float(mpmath.gamma(n) / (2 * mpmath.pi ** (n + 1)) * total)


@pytest.mark.parametrize("n", [2, 3])
def test_cut_locus_constant_from_high_precision_series(n):
    theta = 0.5
    ratios = [mp_cut_locus_kernel(n, t, theta) / asym_cut_locus(n, t, theta) for t in (0.04, 0.02)]
    # ratio = 1 + c t + O(t^2); the linear extrapolant isolates the constant
    assert 2 * ratios[1] - ratios[0] == pytest.approx(1.0, abs=1e-2)
    # the leading-only constant misses the factor (1 - theta/2pi)^{n-1}
    lead = mp_cut_locus_kernel(n, 0.02, theta) / asym_cut_locus(n, 0.02, theta, variant="leading_only")
    assert lead == pytest.approx(ratios[1] * (1 - theta / (2 * math.pi)) ** (n - 1), rel=1e-12)


def test_cut_locus_variants_agree_for_n1():
    assert asym_cut_locus(1, 0.1, 1.5) == asym_cut_locus(1, 0.1, 1.5, variant="leading_only")
    with pytest.raises(DomainError):
        asym_cut_locus(1, 0.1, 1.5, variant="other")


def test_regime_dispatch_and_consistency():
    assert small_time_kernel(CylCoord(1, 0, 0), 0.1).regime == "diagonal"
    v = small_time_kernel(CylCoord(2, 0, 1.0), 0.1)
    assert v.regime == "cut_locus"
    assert v.value == pytest.approx(asym_cut_locus(2, 0.1, 1.0))
    w = small_time_kernel(CylCoord(2, 0.5, 1.0), 0.1)
    assert w.regime == "interior"
    assert w.value == pytest.approx(asym_interior(2, 0.1, CylCoord(2, 0.5, 1.0)))
    # exponent is exactly -d^2/4t of the distance routine
    assert w.exponent == -distance(CylCoord(2, 0.5, 1.0)) ** 2 / (4 * 0.1)


def test_theta_zero_interior_formula_is_continuous():
    n, t, r = 2, 0.1, 0.7
    a = asym_interior(n, t, CylCoord(n, r, 0.0))
    b = asym_interior(n, t, CylCoord(n, r, 1e-6))
    assert b == pytest.approx(a, rel=1e-6)


def test_asymptotic_domains():
    with pytest.raises(DomainError):
        asym_cut_locus(1, 0.1, 0.0)
    with pytest.raises(DomainError):
        asym_interior(1, 0.1, CylCoord(1, 0.0, 1.0))
    with pytest.raises(DomainError):
        asym_diag(1, -0.1)


def test_extrapolated_exponent():
    ts = (0.15, 0.1, 0.07)
    for n in (1, 2):
        for r, th in ((0.0, 1.5), (0.8, 0.0), (0.8, 1.0)):
            c = CylCoord(n, r, th)
            vals = [p_spectral(c, t).value for t in ts]
            d2 = distance(c) ** 2
            assert extrapolate_exponent(c, ts, vals) == pytest.approx(d2, rel=5e-2)
    assert prefactor_power(CylCoord(3, 0, 1)) == 6
    with pytest.raises(DomainError):
        extrapolate_exponent(CylCoord(1, 0.5, 0.5), (0.1, 0.2), (1.0, 1.0))
