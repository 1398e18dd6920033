"""Sub-Riemannian distance from the north pole and small-time kernel asymptotics.

Away from the cut locus the fibre angle ``phi`` of the steepest-descent
critical point solves

    phi + theta = cos(r) sin(phi) arccos(u) / sqrt(1 - u^2),   u = cos(r) cos(phi),

which has a unique root in [-pi, pi]. The distance then is
``d^2 = (phi + theta)^2 tan(r)^2 / sin(phi)^2``, evaluated here in the
equivalent form ``d = sin(r) arccos(u) / sqrt(1 - u^2)`` that stays
well conditioned when ``sin(phi) -> 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RootFindingError
from .numerics import QuadratureSpec, find_root, integrate
from .subriemannian import CylCoord

__all__ = [
    "GeodesicData",
    "AsymCoefficients",
    "AsymptoticValue",
    "SEAM",
    "solve_phi",
    "distance",
    "asym_coefficients",
    "asym_diag",
    "asym_cut_locus",
    "asym_interior",
    "small_time_kernel",
    "prefactor_power",
    "extrapolate_exponent",
]

SEAM = 1e-8


@dataclass(frozen=True)
class GeodesicData:
    phi: float
    u: float
    dist: float
    regime: str  # "diagonal", "cut_locus" or "interior"
    hessian: float = math.nan  # 1 - u arccos(u)/sqrt(1-u^2)
    residual: float = 0.0


@dataclass(frozen=True)
class AsymCoefficients:
    A_n: float
    B_n: float
    error: float = 0.0


@dataclass(frozen=True)
class AsymptoticValue:
    regime: str
    exponent: float
    prefactor: float
    value: float


def _one_minus_u2(r, phi):
    # 1 - cos^2 r cos^2 phi without cancellation
    return math.sin(r) ** 2 + (math.cos(r) * math.sin(phi)) ** 2


def _acos_ratio(u, s):
    """``arccos(u) / s`` with ``s = sqrt(1 - u^2)``; tends to 1 as u -> 1."""
    if s < 1e-6 and u > 0:
        return 1.0 + s * s / 6.0
    return math.atan2(s, u) / s


def _hessian_factor(u, s):
    """``1 - u arccos(u) / sqrt(1 - u^2)``, positive for u in (-1, 1)."""
    if s < 1e-4 and u > 0:
        # 1 - u acos(u)/s ~ s^2 (2/3 + ...) near u = 1
        return s * s * (2.0 / 3.0 + 2.0 * s * s / 15.0)
    return 1.0 - u * _acos_ratio(u, s)


def phi_residual(r, theta, phi):
    """``cos r sin phi arccos(u)/sqrt(1-u^2) - phi - theta``; decreasing in phi."""
    u = math.cos(r) * math.cos(phi)
    s = math.sqrt(_one_minus_u2(r, phi))
    return math.cos(r) * math.sin(phi) * _acos_ratio(u, s) - phi - theta


def phi_residual_derivative(r, phi):
    u = math.cos(r) * math.cos(phi)
    s2 = _one_minus_u2(r, phi)
    return -math.sin(r) ** 2 / s2 * _hessian_factor(u, math.sqrt(s2))


def _check_coord(r, theta):
    if not 0 <= r < math.pi / 2:
        raise DomainError(f"r must lie in [0, pi/2), got {r}")
    if not -math.pi <= theta <= math.pi:
        raise DomainError(f"theta must lie in [-pi, pi], got {theta}")


def solve_phi(coord: CylCoord, tol: float = 1e-13) -> GeodesicData:
    """Critical fibre angle ``phi(r, theta)`` and the derived geodesic data.

    Bisection on [-pi, pi] followed by Newton polishing with the closed-form
    derivative. For ``r < SEAM`` the point is on the cut locus (or is the
    pole itself) and the limiting values ``phi = -sign(theta) pi`` are
    returned; for ``|theta| < SEAM`` the root is ``phi = 0``.
    """
    r, theta = float(coord.r), float(coord.theta)
    _check_coord(r, theta)
    if r < SEAM:
        if abs(theta) < SEAM:
            return GeodesicData(0.0, 1.0, 0.0, "diagonal")
        return GeodesicData(-math.copysign(math.pi, theta), -1.0,
                            math.sqrt(2 * math.pi * abs(theta) - theta * theta), "cut_locus")
    if abs(theta) < SEAM:
        phi = 0.0
    else:
        lo, hi = -math.pi, math.pi
        # exact endpoint values (sin phi = 0 there); floating sin(pi) would add noise
        glo, ghi = math.pi - theta, -math.pi - theta
        if glo == 0:
            phi = lo
        elif ghi == 0:
            phi = hi
        elif glo < 0 or ghi > 0:
            raise RootFindingError("phi-equation is not sign-definite on [-pi, pi]",
                                   signs=(math.copysign(1, glo), math.copysign(1, ghi)))
        else:
            def g(p):
                if p == lo:
                    return glo
                if p == hi:
                    return ghi
                return phi_residual(r, theta, p)
            phi = find_root(g, lo, hi, tol=tol, dg=lambda p: phi_residual_derivative(r, p))
    u = math.cos(r) * math.cos(phi)
    s = math.sqrt(_one_minus_u2(r, phi))
    dist = math.sin(r) * _acos_ratio(u, s)
    return GeodesicData(phi, u, dist, "interior", _hessian_factor(u, s),
                        abs(phi_residual(r, theta, phi)))


def distance(coord: CylCoord) -> float:
    """Sub-Riemannian distance ``d(r, theta)`` from the north pole, in [0, pi].

    On the cut locus ``r = 0``: ``d^2 = 2 pi |theta| - theta^2``. For
    ``theta = 0``: ``d = r``.
    """
    return solve_phi(coord).dist


def distance_case2(r, theta, phi):
    """The ``(phi+theta)^2 tan^2 r / sin^2 phi`` form of ``d^2``."""
    return (phi + theta) ** 2 * math.tan(r) ** 2 / math.sin(phi) ** 2


# --- small-time coefficients ---------------------------------------------------------

def _sinh_ratio(y):
    """``y / sinh y`` with its value 1 at the origin."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-2
    ys = np.where(small, 1.0, y)
    return np.where(small, 1 - y * y / 6 + 7 * y ** 4 / 360, ys / np.sinh(ys))


def _hyperbolic_curvature(y):
    """``(sinh y - y cosh y) / (y^2 sinh y)`` with its limit -1/3 at the origin."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-2
    ys = np.where(small, 1.0, y)
    exact = (np.sinh(ys) - ys * np.cosh(ys)) / (ys * ys * np.sinh(ys))
    return np.where(small, -1.0 / 3.0 + y * y / 45.0, exact)


def asym_coefficients(n: int, quad: QuadratureSpec | None = None) -> AsymCoefficients:
    """On-diagonal small-time coefficients.

    ``A_n = int (y/sinh y)^n dy`` and
    ``B_n = int (y/sinh y)^n (n^2 + n(n-1)(sinh y - y cosh y)/(y^2 sinh y)) dy``,
    so that ``p_t(0,0) = (4 pi t)^{-(n+1)} (A_n + B_n t + O(t^2))``.
    Integrands are even; the half line is windowed at ``Y`` with an explicit
    bound ``(2.01 y)^n e^{-n y}`` on the discarded tail.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    quad = quad or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-14)
    Y = 5.0
    weight = n * n + n * (n - 1) / 3.0
    while True:
        tail = 2 * weight * (2.01 * Y) ** n * math.exp(-n * Y) / (n * (1 - 1 / Y))
        if tail < 0.01 * quad.abs_tol:
            break
        Y += 1.0
    spec = quad.with_window(0.0, Y, tail)

    def f_a(y):
        return 2 * _sinh_ratio(y) ** n

    def f_b(y):
        return 2 * _sinh_ratio(y) ** n * (n * n + n * (n - 1) * _hyperbolic_curvature(y))

    A = integrate(f_a, 0.0, Y, spec, initial=8)
    B = integrate(f_b, 0.0, Y, spec, initial=8)
    return AsymCoefficients(float(A.value), float(B.value), max(A.error, B.error))


def asym_diag(n, t, coeffs: AsymCoefficients | None = None):
    """``(4 pi t)^{-(n+1)} (A_n + B_n t)``."""
    if not t > 0:
        raise DomainError("t must be positive")
    c = coeffs or asym_coefficients(n)
    return (4 * math.pi * t) ** (-(n + 1)) * (c.A_n + c.B_n * t)


_CUT_VARIANTS = ("full", "leading_only")


def asym_cut_locus(n, t, theta, variant="full"):
    """Leading term of ``p_t(0, theta)`` on the cut locus.

    With ``d^2 = 2 pi |theta| - theta^2`` the result is
    ``C(theta) t^{-2n} e^{-d^2/4t}``. ``variant="full"`` uses
    ``C = (d^2 / 2 pi)^{n-1} / (2^{3n} (n-1)!)``, the residue at ``y = -i pi``
    of the exact odd-sphere kernel: every ``t^j`` correction of ``q_t`` carries
    a pole of order ``n + j`` and contributes at leading order. ``"leading_only"``
    keeps just the first term of ``q_t``, giving ``C = |theta|^{n-1} / (2^{3n} (n-1)!)``;
    the two agree for ``n = 1`` and differ by ``(1 - |theta|/2pi)^{n-1}`` otherwise.
    """
    th = abs(theta)
    if not 0 < th < math.pi:
        raise DomainError(f"|theta| must lie in (0, pi), got {theta}")
    if not t > 0:
        raise DomainError("t must be positive")
    if variant not in _CUT_VARIANTS:
        raise DomainError(f"variant must be one of {_CUT_VARIANTS}, got {variant!r}")
    return _cut_locus_parts(n, t, th, variant)[2]


def _cut_locus_parts(n, t, th, variant="full"):
    d2 = 2 * math.pi * th - th * th
    base = d2 / (2 * math.pi) if variant == "full" else th
    pref = base ** (n - 1) / (2 ** (3 * n) * t ** (2 * n) * math.factorial(n - 1))
    return -d2 / (4 * t), pref, pref * math.exp(-d2 / (4 * t))


def _interior_parts(n, t, coord):
    r, theta = coord.r, coord.theta
    geo = solve_phi(coord)
    exponent = -geo.dist ** 2 / (4 * t)
    if geo.phi == 0.0:
        pref = (4 * math.pi * t) ** (-(n + 0.5)) * (r / math.sin(r)) ** n \
            / math.sqrt(1 - r / math.tan(r))
    else:
        u = geo.u
        s2 = _one_minus_u2(r, geo.phi)
        acos_u = math.atan2(math.sqrt(s2), u)
        pref = ((4 * math.pi * t) ** (-(n + 0.5)) / math.sin(r) * acos_u ** n
                / math.sqrt(geo.hessian) / s2 ** ((n - 1) / 2))
    return exponent, pref, pref * math.exp(exponent)


def asym_interior(n, t, coord: CylCoord):
    """Steepest-descent leading term for ``r > 0``.

    ``(4 pi t)^{-(n+1/2)} / sin r * arccos(u)^n (1 - u arccos u/sqrt(1-u^2))^{-1/2}
    (1-u^2)^{-(n-1)/2} e^{-d^2/4t}``; at ``theta = 0`` this reduces to
    ``(4 pi t)^{-(n+1/2)} (r/sin r)^n (1 - r cot r)^{-1/2} e^{-r^2/4t}``.
    """
    if not 0 < coord.r < math.pi / 2:
        raise DomainError("asym_interior needs r in (0, pi/2)")
    if not t > 0:
        raise DomainError("t must be positive")
    return _interior_parts(n, t, coord)[2]


def small_time_kernel(coord: CylCoord, t, coeffs: AsymCoefficients | None = None) -> AsymptoticValue:
    """Pick the regime for ``coord`` and return its small-time approximation."""
    n = coord.n
    if not t > 0:
        raise DomainError("t must be positive")
    if coord.r < SEAM and abs(coord.theta) < SEAM:
        c = coeffs or asym_coefficients(n)
        pref = (4 * math.pi * t) ** (-(n + 1)) * (c.A_n + c.B_n * t)
        return AsymptoticValue("diagonal", 0.0, pref, pref)
    if coord.r < SEAM:
        th = abs(coord.theta)
        if th >= math.pi:
            raise DomainError("the cut-locus expansion needs |theta| < pi")
        return AsymptoticValue("cut_locus", *_cut_locus_parts(n, t, th))
    return AsymptoticValue("interior", *_interior_parts(n, t, coord))


def prefactor_power(coord: CylCoord) -> float:
    """Power ``a`` in the ``t^{-a}`` prefactor of the small-time kernel at ``coord``.

    ``n + 1`` on the diagonal, ``2n`` on the cut locus, ``n + 1/2`` elsewhere.
    """
    n = coord.n
    if coord.r < SEAM:
        return float(n + 1) if abs(coord.theta) < SEAM else float(2 * n)
    return n + 0.5


def extrapolate_exponent(coord: CylCoord, ts, values) -> float:
    """Limit of ``-4 t log p_t`` as ``t -> 0`` from samples at three or more times.

    With ``p_t ~ C t^{-a} e^{-d^2/4t} (1 + c t + ...)`` and ``a`` known from the
    regime, ``-4t log p_t - 4 a t log t = d^2 - 4 t log C + O(t^2)``; the
    constant of a least-squares fit in ``(1, t, t^2)`` estimates ``d^2``.
    """
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(values, dtype=float)
    if ts.size < 3 or ts.shape != vals.shape:
        raise DomainError("need at least three (t, p) samples")
    if np.any(vals <= 0) or np.any(ts <= 0):
        raise DomainError("samples must be positive")
    a = prefactor_power(coord)
    y = -4 * ts * np.log(vals) - 4 * a * ts * np.log(ts)
    design = np.stack([np.ones_like(ts), ts, ts * ts], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])
