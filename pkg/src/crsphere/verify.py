"""Desk-scale verification suite.

Each ``criterion_*`` function runs one family of checks and returns a list
of :class:`Check` records. ``tol_scale`` multiplies every tolerance, so
``tol_scale=0`` forces failures (useful to exercise the failure path).
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .geodesy import (asym_coefficients, distance, extrapolate_exponent, solve_phi)
from .green import LaplaceQuery, green_conformal, laplace_lhs, laplace_rhs
from .operators import RadialGrid, green_residual, heat_residual, mu_integral, radial_drift
from .riemannian import Truncation, q_spectral, q_theta
from .special import jacobi_eigen_residual
from .subriemannian import CylCoord, p_integral, p_spectral, p_spectral_array

__all__ = ["Check", "CRITERIA", "run_all", "all_passed"]


@dataclass
class Check:
    criterion: int
    name: str
    anchor: str
    measured: float
    tolerance: float
    passed: bool
    seconds: float = 0.0

    def as_dict(self):
        return asdict(self)


def _check(criterion, name, anchor, measured, tol, scale, t0):
    measured = float(measured)
    tol = tol * scale
    return Check(criterion, name, anchor, measured, tol,
                 bool(np.isfinite(measured) and measured <= tol), time.perf_counter() - t0)


def criterion_1(quick=False, scale=1.0):
    """Spectral against integral representation of the subelliptic kernel."""
    t0 = time.perf_counter()
    ns = (1,) if quick else (1, 2)
    ts = (0.5,) if quick else (0.25, 0.5, 1.0)
    rs = (0.0, 0.6, 1.4) if quick else (0.0, 0.3, 0.6, 1.0, 1.4)
    ths = (0.0, 1.5, -3.0) if quick else (0.0, 0.5, -0.5, 1.5, -1.5, 3.0, -3.0)
    worst = 0.0
    for n in ns:
        for t in ts:
            for r in rs:
                for th in ths:
                    c = CylCoord(n, r, th)
                    a = p_spectral(c, t).value
                    b = p_integral(c, t).value
                    worst = max(worst, abs(a - b) / abs(a))
    return [_check(1, "max |p_spectral - p_integral| / p_spectral",
                   "eigenfunction series vs fibre integral of the Riemannian kernel",
                   worst, 1e-6, scale, t0)]


def criterion_2(quick=False, scale=1.0):
    """Gegenbauer series against the theta-function representation of q_t."""
    t0 = time.perf_counter()
    ns = (1, 2) if quick else (1, 2, 3)
    ts = (0.05, 0.5) if quick else (0.05, 0.5, 2.0)
    deltas = np.linspace(0.05, math.pi - 0.05, 8 if quick else 20)
    worst = 0.0
    for n in ns:
        for t in ts:
            if t < 0.2:
                # cancellation in float64 near delta = pi at small t
                vals, _ = q_spectral(n, t, np.cos(deltas), Truncation(abs_tol=1e-60), dps=50)
            else:
                vals, _ = q_spectral(n, t, np.cos(deltas))
            for d, v in zip(deltas, np.atleast_1d(vals)):
                ref = q_theta(n, t, float(d))
                worst = max(worst, abs(float(v) - ref) / abs(ref))
    return [_check(2, "max |q_spectral - q_theta| / q", "Gegenbauer series vs theta function",
                   worst, 1e-8, scale, t0)]


def criterion_3(quick=False, scale=1.0):
    """Total mass of the kernel against the measure mu_r."""
    t0 = time.perf_counter()
    worst = 0.0
    for n in ((1,) if quick else (1, 2)):
        for t in (0.25, 1.0):
            res = mu_integral(lambda r, th: p_spectral_array(n, r, th, t)[0], n)
            worst = max(worst, abs(res.value - 1.0))
    return [_check(3, "max |int p dmu - 1|", "stochastic completeness", worst, 1e-6, scale, t0)]


def criterion_4(quick=False, scale=1.0):
    """Heat equation residual of the spectral kernel at interior points."""
    t0 = time.perf_counter()
    grid = RadialGrid.interior(3, 4, margin=0.2)
    rs, ths = grid.points()
    if quick:
        rs, ths = rs[::3], ths[::3]
    worst = 0.0
    for n in (1, 2):
        for r, th in zip(rs, ths):
            c = CylCoord(n, float(r), float(th))
            p = p_spectral(c, 0.5).value
            worst = max(worst, heat_residual(n, 0.5, c) / p)
    return [_check(4, "max |d_t p - L~p| / p at t = 0.5", "radial sub-Laplacian heat equation",
                   worst, 1e-4, scale, t0)]


def criterion_5(quick=False, scale=1.0):
    """Jacobi differential equation for P_m^{(n-1,|k|)}."""
    t0 = time.perf_counter()
    x = np.linspace(-0.95, 0.95, 20)
    worst = 0.0
    for n in (1, 2, 3):
        for k in range(6):
            for m in range(11):
                worst = max(worst, float(np.max(np.abs(jacobi_eigen_residual(m, n, k, x)))))
    return [_check(5, "max |Psi_k P + m(m+n+|k|) P|", "Jacobi differential equation",
                   worst, 1e-9, scale, t0)]


_GREEN_POINTS = [(0.6, 1.0), (0.2, 2.5), (1.2, -0.4), (0.9, 3.0), (0.4, -1.3), (1.4, 0.0)]
_LAPLACE_POINTS = [(0.6, 1.0), (1.0, 0.0), (0.3, 2.0), (1.2, -2.5)]
_RESIDUAL_POINTS = [(0.8, 2.0), (1.1, 1.0), (0.5, -1.5), (1.3, 0.3),
                    (0.7, 3.0), (1.0, -2.2), (0.4, 2.8), (1.2, -0.9)]


def criterion_6(quick=False, scale=1.0):
    """Green function: closed form, Laplace identity in both directions, PDE residual."""
    out = []
    ns = (1,) if quick else (1, 2)
    t0 = time.perf_counter()
    worst = 0.0
    for n in ns:
        for r, th in _GREEN_POINTS:
            c = CylCoord(n, r, th)
            worst = max(worst, abs(laplace_rhs(LaplaceQuery(c, 0.0)) - green_conformal(c)))
    out.append(_check(6, "(a) max |laplace_rhs(0) - G|", "cosh factorisation at lambda = 0",
                      worst, 1e-8, scale, t0))
    t0 = time.perf_counter()
    worst = 0.0
    lams = (1.0,) if quick else (0.25, 1.0, 4.0)
    for n in ns:
        for r, th in _LAPLACE_POINTS[: 2 if quick else 4]:
            for lam in lams:
                q = LaplaceQuery(CylCoord(n, r, th), lam)
                lhs, rhs = laplace_lhs(q), laplace_rhs(q)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    out.append(_check(6, "(b) max |lhs - rhs| / rhs of the Laplace identity",
                      "time integral of the kernel vs y-integral", worst, 1e-5, scale, t0))
    t0 = time.perf_counter()
    worst = 0.0
    for n in ns:
        for r, th in _RESIDUAL_POINTS[: 3 if quick else 8]:
            worst = max(worst, green_residual(n, CylCoord(n, r, th)))
    out.append(_check(6, "(c) max |(-L~ + n^2) G|", "conformal sub-Laplacian Green function",
                      worst, 1e-4, scale, t0))
    return out


def criterion_7(quick=False, scale=1.0):
    """Sub-Riemannian distance: cut locus, seams, diameter and comparison."""
    out = []
    t0 = time.perf_counter()
    ths = np.linspace(-math.pi, math.pi, 41)
    worst = max(abs(distance(CylCoord(1, 0.0, float(th))) ** 2 - (2 * math.pi * abs(th) - th * th))
                for th in ths)
    out.append(_check(7, "max |d(0,theta)^2 - (2 pi|theta| - theta^2)|", "cut locus distance",
                      worst, 1e-12, scale, t0))
    t0 = time.perf_counter()
    worst = max(abs(distance(CylCoord(1, r, 1e-7)) - r) for r in (0.3, 0.7, 1.2))
    out.append(_check(7, "max |d(r, 1e-7) - r|", "distance along theta = 0", worst, 1e-6, scale, t0))

    t0 = time.perf_counter()
    size = 20 if quick else 50
    rs = np.linspace(0.0, math.pi / 2, size, endpoint=False)
    ths = np.linspace(-math.pi, math.pi, size)
    best, where, below = -1.0, None, 0.0
    for r in rs:
        for th in ths:
            geo = solve_phi(CylCoord(1, float(r), float(th)))
            if geo.dist > best:
                best, where = geo.dist, (r, th)
            riem = math.acos(max(-1.0, min(1.0, math.cos(r) * math.cos(th))))
            below = max(below, riem - geo.dist)
    out.append(_check(7, "|sup d - pi| on the grid", "diameter pi", abs(best - math.pi), 1e-3, scale, t0))
    at_pole = where is not None and where[0] == 0 and abs(abs(where[1]) - math.pi) < 1e-12
    out.append(_check(7, "sup attained at (0, +-pi) (0 = yes)", "diameter attained on the cut locus",
                      0.0 if at_pole else 1.0, 0.5, scale, t0))
    out.append(_check(7, "max (Riemannian distance - d) on the grid", "sub-Riemannian >= Riemannian",
                      max(below, 0.0), 1e-12, scale, t0))
    return out


def criterion_8(quick=False, scale=1.0):
    """Small-time behaviour on and off the diagonal."""
    out = []
    t0 = time.perf_counter()
    c1 = asym_coefficients(1)
    out.append(_check(8, "(a) |A_1 - pi^2/2|", "coefficient quadrature", abs(c1.A_n - math.pi ** 2 / 2),
                      1e-10, scale, t0))

    t0 = time.perf_counter()
    errs = []
    for t in (0.05, 0.03, 0.02):
        p = p_spectral(CylCoord(1, 0.0, 0.0), t, Truncation(max_terms=20000, abs_tol=1e-12)).value
        errs.append(abs(p * (4 * math.pi * t) ** 2 / (c1.A_n + c1.B_n * t) - 1))
    out.append(_check(8, "(b) |ratio - 1| at t = 0.05", "on-diagonal expansion", errs[0], 5e-2, scale, t0))
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    out.append(_check(8, "(b) ratio error strictly decreasing in t (0 = yes)", "on-diagonal expansion",
                      0.0 if decreasing else 1.0, 0.5, scale, t0))

    t0 = time.perf_counter()
    ts = (0.15, 0.1, 0.07)
    worst = 0.0
    for n in ((1,) if quick else (1, 2)):
        for r, th in ((0.0, 1.5), (0.8, 0.0), (0.8, 1.0)):
            c = CylCoord(n, r, th)
            vals = [p_spectral(c, t).value for t in ts]
            d2 = distance(c) ** 2
            worst = max(worst, abs(extrapolate_exponent(c, ts, vals) - d2) / d2)
    out.append(_check(8, "(c) max relative error of extrapolated -4t log p vs d^2",
                      "Varadhan-type exponent", worst, 5e-2, scale, t0))
    return out


def criterion_9(quick=False, scale=1.0):
    """n = 1 drift coefficient against the SU(2) form 2 cot 2r."""
    t0 = time.perf_counter()
    r = np.linspace(0.1, 1.45, 10)
    worst = float(np.max(np.abs(radial_drift(1, r) - 2 / np.tan(2 * r))))
    return [_check(9, "max |(2n-1)cot r - tan r - 2 cot 2r| for n = 1", "SU(2) radial operator",
                   worst, 1e-12, scale, t0)]


CRITERIA: dict[int, Callable] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


def run_all(quick=False, scale=1.0, only=None, progress=None):
    """Run the selected criteria in order; ``progress`` is called with each Check."""
    checks = []
    for key, fn in CRITERIA.items():
        if only and key not in only:
            continue
        for chk in fn(quick=quick, scale=scale):
            checks.append(chk)
            if progress:
                progress(chk)
    return checks


def all_passed(checks):
    return all(c.passed for c in checks)
