"""Green function of the conformal sub-Laplacian ``-L + n^2`` and its Laplace representation.

For ``Re lambda > 0``

    int_0^inf p_t(r, theta) e^{-n^2 t - lambda/t} dt
        = Gamma(n) / (2^{n+2} pi^{n+1})
          int dy / (cosh sqrt(y^2 + 4 lambda) - cos r cos(theta + i y))^n,

and letting ``lambda -> 0`` gives the closed form
``Gamma(n/2)^2 / (8 pi^{n+1} (1 - 2 cos r cos theta + cos^2 r)^{n/2})``.
Both sides are computed independently here so the identity can be checked.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .numerics import QuadratureSpec, integrate
from .riemannian import Truncation
from .subriemannian import CylCoord, SpectralSeries

__all__ = [
    "LaplaceQuery",
    "green_conformal",
    "green_conformal_array",
    "laplace_lhs",
    "laplace_rhs",
]


@dataclass(frozen=True)
class LaplaceQuery:
    coord: CylCoord
    lam: complex

    def __post_init__(self):
        lam = complex(self.lam)
        if lam.real < 0 or (lam.real == 0 and lam != 0):
            raise DomainError(f"need Re(lambda) > 0 or lambda = 0, got {self.lam}")
        if lam == 0 and _at_pole(self.coord.r, self.coord.theta):
            raise SingularityError("lambda = 0 at the pole (0, 0) diverges")

    @property
    def is_real(self):
        return complex(self.lam).imag == 0


def _at_pole(r, theta):
    return r == 0 and theta == 0


def _pole_gap(r, theta):
    """``1 - 2 cos r cos theta + cos^2 r`` written as a sum of squares."""
    c = np.cos(r)
    return (2 * np.sin(np.asarray(r) / 2) ** 2) ** 2 + 4 * c * np.sin(np.asarray(theta) / 2) ** 2


def green_conformal_array(n, r, theta):
    """Vectorised closed-form Green function; ``inf`` at the pole."""
    gap = _pole_gap(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    with np.errstate(divide="ignore"):
        return math.gamma(n / 2) ** 2 / (8 * math.pi ** (n + 1)) * gap ** (-n / 2)


def green_conformal(coord: CylCoord) -> float:
    """``Gamma(n/2)^2 / (8 pi^{n+1} (1 - 2 cos r cos theta + cos^2 r)^{n/2})``.

    Raises
    ------
    SingularityError
        At the pole ``(r, theta) = (0, 0)``.
    """
    if _at_pole(coord.r, coord.theta):
        raise SingularityError("the Green function has its pole at (0, 0)")
    return float(green_conformal_array(coord.n, coord.r, coord.theta))


# --- right-hand side: integral over y ------------------------------------------------

def _rhs_window(n, r, theta, lam, target):
    """Half-width Y and a bound on the integrand's mass beyond it.

    For real ``lambda >= 0``, ``|D| >= Re D >= kappa cosh y + (cosh sqrt(y^2+4 lambda) - cosh y)``
    with ``kappa = 1 - cos r cos theta``; either piece gives an ``e^{-n|y|}`` bound.
    Complex ``lambda`` falls back to the observed decay of ``|D|``.
    """
    pref = math.gamma(n) / (2 ** (n + 2) * math.pi ** (n + 1))
    kappa = 2 * math.sin(r / 2) ** 2 + 2 * math.cos(r) * math.sin(theta / 2) ** 2
    kappa = max(kappa, 0.0)  # 1 - cos r cos theta without cancellation
    lam_re = lam.real
    Y = 2.0
    while True:
        if lam.imag == 0:
            tails = []
            if kappa > 0:
                tails.append((2 / kappa) ** n * math.exp(-n * Y) / n)
            if lam_re > 0:
                a = 2 * math.sqrt(lam_re)
                if Y + a > 1:
                    low = lam_re * (1 - math.exp(-2 * Y))
                    tails.append((Y + a) ** n / low ** n * math.exp(-n * Y)
                                 / (n * (1 - 1 / (Y + a))))
            tail = 2 * pref * min(tails) if tails else math.inf
        else:
            D = abs(cmath.cosh(cmath.sqrt(Y * Y + 4 * lam)) - math.cos(r) * cmath.cos(theta + 1j * Y))
            tail = 2 * pref / (n * D ** n)
        if tail <= target:
            return Y, tail
        Y += 1.0
        if Y > 700 / n:
            raise DomainError("cannot bound the y-integral; is (r, theta, lambda) at the pole?")


def laplace_rhs(query: LaplaceQuery, y_quad: QuadratureSpec | None = None):
    """Right-hand side as an integral over ``y`` on a window ``|y| <= Y``.

    For real ``lambda`` the imaginary part of the integrand is odd in ``y``
    and only the real part is integrated; complex ``lambda`` returns the
    complex value.
    """
    y_quad = y_quad or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12)
    n, r, theta = query.coord.n, query.coord.r, query.coord.theta
    lam = complex(query.lam)
    pref = math.gamma(n) / (2 ** (n + 2) * math.pi ** (n + 1))
    Y, tail = _rhs_window(n, r, theta, lam, 0.01 * y_quad.abs_tol)
    c = math.cos(r)

    def f(y):
        w = np.sqrt(y * y + 4 * lam + 0j)
        D = np.cosh(w) - c * np.cos(theta + 1j * y)
        val = pref / D ** n
        return val.real if query.is_real else val

    # the integrand narrows to width ~ sqrt(kappa) near the pole
    initial = max(8, int(2 * Y))
    res = integrate(f, -Y, Y, y_quad.with_window(-Y, Y, tail), initial=initial)
    return res.value


# --- left-hand side: integral over t ----------------------------------------------------

@functools.lru_cache(maxsize=None)
def _diag_coefficients(n):
    from .geodesy import asym_coefficients
    return asym_coefficients(n)


def _small_t_majorant(n, t):
    """Twice the two-term small-time expansion of ``p_t(0,0)``; ``p_t`` is maximal on the diagonal."""
    c = _diag_coefficients(n)
    return 2 * (4 * math.pi * t) ** (-(n + 1)) * (c.A_n + c.B_n * t)


def laplace_lhs(query: LaplaceQuery, t_quad: QuadratureSpec | None = None):
    """``int_0^inf p_t e^{-n^2 t - lambda/t} dt`` from the spectral kernel.

    The range is split at ``t = 1`` and integrated in ``s = log t``. Below
    ``t = 1`` dyadic segments ``[2^{-j-1}, 2^{-j}]`` each get their own
    spectral series, with the truncation tolerance relaxed by the factor
    ``e^{Re lambda / t}`` that damps it there; the total truncation error is
    kept below a tenth of ``t_quad.abs_tol``. Above ``t = 1`` the integrand
    is bounded by ``p_1(0,0) e^{-n^2 t}``.
    """
    lam = complex(query.lam)
    if not lam.real > 0:
        raise DomainError("laplace_lhs needs Re(lambda) > 0")
    t_quad = t_quad or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10)
    n, r, theta = query.coord.n, query.coord.r, query.coord.theta
    tol = t_quad.abs_tol

    # lower cutoff: majorant tail below t_lo, int_0^t_lo M e^{-lam/t} dt <~ M(t_lo) t_lo^2 / Re lam
    edges = [1.0]
    while True:
        t_lo = edges[-1]
        tail_lo = _small_t_majorant(n, t_lo) * math.exp(-lam.real / t_lo) * t_lo ** 2 / lam.real
        if tail_lo <= 0.01 * tol or t_lo < 1e-12:
            break
        edges.append(t_lo / 2)
    edges = edges[::-1]

    # upper cutoff from p_t <= p_1(0, 0) for t >= 1
    p1 = float(SpectralSeries(n, 0.0, 0.0, 1.0)(1.0))
    T = 2.0
    while p1 * math.exp(-n * n * T) / (n * n) > 0.01 * tol:
        T *= 2
    tail_hi = p1 * math.exp(-n * n * T) / (n * n)

    segments = list(zip(edges[:-1], edges[1:])) + [(1.0, T)]
    budget = 0.1 * tol / len(segments)
    total = 0.0
    for a, b in segments:
        expo = min(n * n * a + lam.real / b, 700.0)
        trunc_tol = budget / (b - a) * math.exp(expo)
        series = SpectralSeries(n, r, theta, a, Truncation(max_terms=200000, abs_tol=trunc_tol))

        def f(s, series=series):
            t = np.exp(s)
            return series.at_times(t) * np.exp(-n * n * t - lam / t) * t

        spec = QuadratureSpec(0.5 * tol / len(segments), t_quad.rel_tol, t_quad.max_subdiv)
        res = integrate(lambda s: f(s).real if lam.imag == 0 else f(s),
                        math.log(a), math.log(b), spec, initial=2)
        total += res.value
    del tail_lo, tail_hi  # accounted for in the 0.01 tol targets
    return total
