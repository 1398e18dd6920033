import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crsphere.errors import DomainError
from crsphere.numerics import QuadratureSpec, integrate
from crsphere.operators import (
    RadialGrid,
    apply_delta_r,
    apply_L_tilde,
    green_residual,
    heat_residual,
    mu_density,
    mu_integral,
    radial_drift,
    sphere_volume,
)
from crsphere.subriemannian import CylCoord, p_spectral, p_spectral_array


def test_constant_annihilated():
    one = lambda r, th: np.ones(np.broadcast(r, th).shape)  # noqa: E731
    for n in (1, 2, 3):
        assert abs(apply_L_tilde(one, n, 0.7, 1.0).value) <= 1e-12
        assert abs(apply_delta_r(one, n, 0.7, 1.0).value) <= 1e-12


def test_su2_coefficient():
    assert radial_drift(1, 0.7) == pytest.approx(2 / math.tan(1.4), abs=1e-14)


def test_against_analytic_derivatives():
    n = 2
    f = lambda r, th: np.sin(r) ** 2 * np.cos(2 * th)  # noqa: E731
    r, th = 0.9, 0.4
    exact = (2 * math.cos(2 * r) * math.cos(2 * th)
             + radial_drift(n, r) * math.sin(2 * r) * math.cos(2 * th)
             - 4 * math.tan(r) ** 2 * math.sin(r) ** 2 * math.cos(2 * th))
    val, err = apply_L_tilde(f, n, r, th)
    assert val == pytest.approx(exact, abs=1e-9)
    assert err < 1e-7


def test_laplace_beltrami_on_functions_of_delta():
    # f = cos(delta), delta = arccos(cos r cos theta): f'' + 2n cot(delta) f' = -(2n+1) cos(delta)
    for n in (1, 2, 3):
        f = lambda r, th: np.cos(r) * np.cos(th)  # noqa: E731
        r, th = 0.8, 1.1
        val = apply_delta_r(f, n, r, th).value
        assert val == pytest.approx(-(2 * n + 1) * math.cos(r) * math.cos(th), abs=1e-5)


def test_reeb_direction_difference():
    # Delta^r - L~ = d_thth, which is -1 on e^{i theta} g(r)
    g = lambda r: np.sin(r) ** 3  # noqa: E731
    f = lambda r, th: np.cos(th) * g(r)  # noqa: E731
    r, th = 0.6, 0.9
    diff = apply_delta_r(f, 2, r, th).value - apply_L_tilde(f, 2, r, th).value
    assert diff == pytest.approx(-f(r, th), abs=1e-8)


def test_domain_guard():
    f = lambda r, th: r * th  # noqa: E731
    with pytest.raises(DomainError):
        apply_L_tilde(f, 1, 0.005, 0.0, h=0.01)
    with pytest.raises(DomainError):
        apply_L_tilde(f, 1, math.pi / 2 - 0.01, 0.0, h=0.01)


def test_vectorised_application():
    # batched and scalar ufunc paths may differ by an ulp, amplified by 1/h^2
    f = lambda r, th: np.sin(r) ** 2 * np.cos(th)  # noqa: E731
    rs = np.array([0.5, 0.9])
    ths = np.array([0.1, -2.0])
    vals = apply_L_tilde(f, 1, rs, ths, h=1e-3).value
    for i in range(2):
        assert vals[i] == pytest.approx(apply_L_tilde(f, 1, rs[i], ths[i], h=1e-3).value, rel=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_volume(n):
    res = mu_integral(lambda r, th: np.ones(np.broadcast(r, th).shape), n)
    assert res.value == pytest.approx(2 * math.pi ** (n + 1) / math.gamma(n + 1), rel=1e-13)
    assert sphere_volume(n) == pytest.approx(res.value, rel=1e-13)


def test_first_fourier_mode_integrates_to_zero():
    res = mu_integral(lambda r, th: np.cos(th) * np.exp(np.sin(r)), 2)
    assert abs(res.value) <= 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_mass_of_kernel(n):
    res = mu_integral(lambda r, th: p_spectral_array(n, r, th, 0.5)[0], n)
    assert res.value == pytest.approx(1.0, abs=1e-6)


def test_symmetry_of_operator():
    """int f L~g dmu = int g L~f dmu for fields supported inside (0, pi/2)."""
    n = 2

    def bump(r, c, w):
        z = (r - c) / w
        return np.where(np.abs(z) < 1, np.exp(-1 / np.maximum(1 - z * z, 1e-300)), 0.0)

    f = lambda r, th: bump(r, 0.7, 0.4) * (1 + np.cos(th))  # noqa: E731
    g = lambda r, th: bump(r, 0.8, 0.45) * np.sin(2 * th + 0.3) ** 2  # noqa: E731
    ths = -math.pi + 2 * math.pi * np.arange(64) / 64

    def pairing(u, v):
        def radial(rs):
            R, T = np.meshgrid(rs, ths, indexing="ij")
            lv = apply_L_tilde(v, n, R, T, h=1e-3).value
            return mu_density(n, rs) * (u(R, T) * lv).mean(axis=1) * 2 * math.pi
        return integrate(radial, 0.3, 1.25, QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10)).value

    assert pairing(f, g) == pytest.approx(pairing(g, f), abs=1e-7)


@pytest.mark.parametrize("n,t,r,theta", [(1, 0.5, 0.6, 1.0), (2, 1.0, 1.0, 2.0), (2, 0.5, 0.3, -2.5)])
def test_heat_residual(n, t, r, theta):
    c = CylCoord(n, r, theta)
    assert heat_residual(n, t, c) <= 1e-4 * p_spectral(c, t).value


def test_heat_residual_of_uniform_state():
    assert heat_residual(1, 60.0, CylCoord(1, 0.6, 1.0)) <= 1e-12


@pytest.mark.parametrize("n,r,theta", [(1, 0.8, 2.0), (2, 1.1, 1.0)])
def test_green_residual(n, r, theta):
    assert green_residual(n, CylCoord(n, r, theta)) <= 1e-4


def test_green_residual_fourth_order():
    c = CylCoord(1, 0.8, 2.0)
    e1 = green_residual(1, c, steps=0.04)
    e2 = green_residual(1, c, steps=0.02)
    assert 10 < e1 / e2 < 22


def test_green_residual_near_pole_rejected():
    with pytest.raises(DomainError):
        green_residual(1, CylCoord(1, 0.05, 0.001))


def test_radial_grid():
    grid = RadialGrid.interior(3, 4, margin=0.2)
    assert grid.r_nodes.shape == (3,) and grid.theta_nodes[-1] == pytest.approx(math.pi)
    sampled = grid.sample(lambda r, th: r + th)
    assert sampled.values.shape == (3, 4)
    with pytest.raises(ValueError):
        sampled.values[0, 0] = 1.0
    with pytest.raises(DomainError):
        RadialGrid(np.array([0.5, 0.4]), np.array([0.0]))
    with pytest.raises(DomainError):
        RadialGrid(np.array([0.0, 0.4]), np.array([0.0]))


@settings(max_examples=20, deadline=None)
@given(r=st.floats(0.2, 1.3), th=st.floats(-3.0, 3.0), k=st.integers(0, 3))
def test_delta_minus_L_is_fibre_second_derivative(r, th, k):
    f = lambda rr, tt: np.cos(rr) ** 2 * np.cos(k * tt)  # noqa: E731
    diff = apply_delta_r(f, 1, r, th).value - apply_L_tilde(f, 1, r, th).value
    assert diff == pytest.approx(-k * k * f(r, th), abs=1e-7)
