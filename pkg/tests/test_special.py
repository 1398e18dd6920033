import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from crsphere.errors import DomainError
from crsphere.special import (
    GegenbauerParams,
    JacobiParams,
    binomial,
    cosh_power_integral,
    double_factorial,
    gegenbauer,
    jacobi,
    jacobi_eigen_residual,
    jacobi_norm,
    jacobi_table,
)

X = sp.Symbol("x")


def rodrigues_jacobi(m, a, b):
    """P_m^{(a,b)} from the Rodrigues formula, symbolically."""
    w = (1 - X) ** a * (1 + X) ** b
    expr = (-1) ** m / (2 ** m * sp.factorial(m)) / w * sp.diff(w * (1 - X * X) ** m, X, m)
    return sp.lambdify(X, sp.simplify(expr), "numpy")


def rodrigues_gegenbauer(m, n):
    """C_m^n from its Rodrigues formula (weight (1-x^2)^{n-1/2})."""
    lam = sp.Rational(n)
    w = (1 - X * X) ** (lam - sp.Rational(1, 2))
    c = ((-1) ** m * sp.gamma(lam + sp.Rational(1, 2)) * sp.gamma(m + 2 * lam)
         / (2 ** m * sp.factorial(m) * sp.gamma(2 * lam) * sp.gamma(lam + m + sp.Rational(1, 2))))
    expr = c / w * sp.diff(w * (1 - X * X) ** m, X, m)
    return sp.lambdify(X, sp.simplify(expr), "numpy")


XS = np.linspace(-0.97, 0.97, 9)


@pytest.mark.parametrize("m,a,b", [(0, 0, 0), (1, 2, 3), (2, 0, 1), (3, 1, 4), (4, 2, 0), (5, 1, 2)])
def test_jacobi_matches_rodrigues(m, a, b):
    ref = rodrigues_jacobi(m, a, b)(XS) * np.ones_like(XS)
    np.testing.assert_allclose(jacobi(m, a, b, XS), ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("m,n", [(0, 2), (1, 1), (2, 1), (3, 2), (4, 3), (5, 1)])
def test_gegenbauer_matches_rodrigues(m, n):
    ref = rodrigues_gegenbauer(m, n)(XS) * np.ones_like(XS)
    np.testing.assert_allclose(gegenbauer(m, n, XS), ref, rtol=1e-12, atol=1e-12)


def test_jacobi_examples():
    assert jacobi(JacobiParams(0, 1.0, 2.0), 0.3) == 1.0
    x = 0.37
    assert jacobi(JacobiParams(1, 2, 3), x) == pytest.approx(3 + 3.5 * (x - 1), abs=1e-15)
    assert jacobi(1, 2, 3, 1.0) == 3.0
    for n, k in [(1, 0), (2, 3), (3, 5)]:
        assert jacobi(4, n - 1, k, 1.0) == pytest.approx(math.comb(4 + n - 1, 4), rel=1e-14)


def test_gegenbauer_examples():
    assert gegenbauer(GegenbauerParams(0, 2), 0.7) == 1.0
    assert gegenbauer(1, 3, 0.4) == pytest.approx(2 * 3 * 0.4)
    assert gegenbauer(3, 1, 1.0) == pytest.approx(4.0)


def test_gegenbauer_large_and_complex_arguments():
    # C_m^1(cosh a) = sinh((m+1)a)/sinh(a)
    a = 3.0
    for m in (5, 20):
        assert gegenbauer(m, 1, math.cosh(a)) == pytest.approx(math.sinh((m + 1) * a) / math.sinh(a), rel=1e-12)
    z = 0.3 + 0.8j
    ref = complex(sp.N(sp.gegenbauer(4, 2, sp.sympify(z))))
    assert gegenbauer(4, 2, z) == pytest.approx(ref, rel=1e-13)


def test_invalid_params():
    with pytest.raises(DomainError):
        JacobiParams(-1, 0, 0)
    with pytest.raises(DomainError):
        JacobiParams(2, -1.5, 0)
    with pytest.raises(DomainError):
        GegenbauerParams(2, 0)
    with pytest.raises(DomainError):
        jacobi(1.5, 0, 0, 0.1)


@pytest.mark.parametrize("m,n,k", [(0, 1, 0), (0, 2, 1), (2, 1, 3), (3, 2, 2), (5, 3, 4)])
def test_jacobi_norm_against_quadrature(m, n, k):
    f = lambda x: jacobi(m, n - 1, k, x) ** 2 * (1 - x) ** (n - 1) * (1 + x) ** k  # noqa: E731
    ref, _ = quad(f, -1, 1, epsabs=1e-14, epsrel=1e-13)
    assert jacobi_norm(m, n, k) == pytest.approx(ref, rel=1e-11)


def test_jacobi_norm_examples():
    assert jacobi_norm(0, 1, 0) == pytest.approx(2.0)
    assert jacobi_norm(0, 2, 1) == pytest.approx(4.0 / 3.0)


def test_double_factorial():
    assert double_factorial(5) == 15
    assert double_factorial(6) == 48
    assert double_factorial(0) == 1
    assert double_factorial(-1) == 1
    with pytest.raises(DomainError):
        double_factorial(-2)


@pytest.mark.parametrize("n", range(1, 7))
def test_cosh_power_integral(n):
    ref, _ = quad(lambda y: math.cosh(y) ** -n, -60, 60, epsabs=1e-14, limit=200)
    assert cosh_power_integral(n) == pytest.approx(ref, rel=1e-12)
    # the Green function identity Gamma(n) int dy/cosh^n = 2^{n-1} Gamma(n/2)^2
    assert math.gamma(n) * cosh_power_integral(n) == pytest.approx(2 ** (n - 1) * math.gamma(n / 2) ** 2)


def test_binomial_switches_to_log_gamma_smoothly():
    assert binomial(999, 3) == math.comb(999, 3)
    assert binomial(1001, 3) == pytest.approx(math.comb(1001, 3), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(0, 25), n=st.integers(1, 4), k=st.integers(0, 8))
def test_value_at_one_is_binomial(m, n, k):
    assert jacobi(m, n - 1, k, 1.0) == pytest.approx(math.comb(m + n - 1, m), rel=1e-11)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(0, 15), a=st.integers(0, 4), b=st.integers(0, 6),
       x=st.floats(-1, 1, allow_nan=False))
def test_jacobi_reflection(m, a, b, x):
    lhs = jacobi(m, a, b, -x)
    rhs = (-1) ** m * jacobi(m, b, a, x)
    scale = math.comb(m + max(a, b), m)
    assert abs(lhs - rhs) <= 1e-11 * scale


@settings(max_examples=60, deadline=None)
@given(m=st.integers(0, 10), n=st.integers(1, 3), k=st.integers(-5, 5),
       x=st.floats(-0.99, 0.99, allow_nan=False))
def test_jacobi_differential_equation(m, n, k, x):
    assert abs(jacobi_eigen_residual(m, n, k, x)) <= 1e-9


def test_table_consistent_with_single_evaluation():
    x = np.linspace(-1, 1, 7)
    tab = jacobi_table(6, 1.0, 3.0, x)
    for m in range(7):
        np.testing.assert_allclose(tab[m], jacobi(m, 1.0, 3.0, x), rtol=0, atol=0)
