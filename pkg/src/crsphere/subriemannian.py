"""Subelliptic heat kernel ``p_t(r, theta)`` of the CR sphere, issued from the north pole.

Two independent representations:

* :func:`p_spectral` -- the Fourier-Jacobi eigenfunction expansion with
  eigenvalues ``lambda_{m,k} = 4m(m+|k|+n) + 2|k|n``;
* :func:`p_integral` -- the Gaussian transform in the fibre direction of
  the Riemannian kernel, ``(4 pi t)^{-1/2} int e^{-(y+i theta)^2/4t} q_t(cos r cosh y) dy``.

The density is taken against the measure
``(2 pi^n / Gamma(n)) sin(r)^{2n-1} cos(r) dr dtheta`` of total mass
``2 pi^{n+1} / Gamma(n+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError, RegimeError, TruncationError
from .numerics import QuadratureSpec, compensated_sum, integrate
from .riemannian import Truncation, q_spectral
from .special import log_binomial

__all__ = [
    "CylCoord",
    "KernelValue",
    "SpectralSeries",
    "eigenvalue",
    "p_spectral",
    "p_spectral_array",
    "p_integral",
    "p_uniform_limit",
    "T_MIN_INTEGRAL",
]

T_MIN_INTEGRAL = 0.05


@dataclass(frozen=True)
class CylCoord:
    """Point of S^{2n+1} in fibration-adapted coordinates.

    ``r`` in [0, pi/2) is the radial coordinate on CP^n, ``theta`` in
    [-pi, pi] the fibre angle (both ends describe the same fibre point).
    """

    n: int
    r: float
    theta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if not 0 <= self.r < math.pi / 2:
            raise DomainError(f"r must lie in [0, pi/2), got {self.r}")
        if not -math.pi <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [-pi, pi], got {self.theta}")


@dataclass(frozen=True)
class KernelValue:
    value: float
    method: str
    error_estimate: float
    truncation: Optional[Truncation] = None


def eigenvalue(m, k, n):
    """``lambda_{m,k} = 4m(m+|k|+n) + 2|k|n``."""
    k = abs(k)
    return 4 * m * (m + k + n) + 2 * k * n


def p_uniform_limit(n):
    """Long-time limit ``Gamma(n+1) / (2 pi^{n+1})`` of the kernel."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return math.gamma(n + 1) / (2 * math.pi ** (n + 1))


def _log_majorant(m, k, n, t):
    """Log of a bound on the modulus of the paired (k, -k) term at any point.

    Uses ``|cos(r)^k P_m^{(n-1,k)}(cos 2r)| <= binomial(m+n-1, m)``.
    """
    pair = np.where(np.asarray(k) > 0, math.log(2.0), 0.0)
    return (math.lgamma(n) - math.log(2) - (n + 1) * math.log(math.pi) + pair
            + np.log(2 * m + k + n) + log_binomial(m + k + n - 1, n - 1)
            + log_binomial(m + n - 1, m) - eigenvalue(m, k, n) * t)


def _plan(n, t, abs_tol, max_terms):
    """Number of m-terms per |k| and the certified tail for time ``t``.

    For each k ascending, m runs until the geometric bound on the remaining
    m-terms is below ``abs_tol / (4.2 (k^2 + 1))``; k stops once the bound on
    all remaining k (ratio ``(K+1+n)/(K+1) e^{-2nt}``) is below ``abs_tol/2``.
    """
    counts = []
    tail_total = 0.0
    k = 0
    while True:
        budget = abs_tol / (4.2 * (k * k + 1))
        m = 0
        block = []  # majorants of included terms, in log
        while True:
            block.append(_log_majorant(m, k, n, t))
            m1 = m + 1
            ratio = ((2 * m1 + 2 + k + n) / (2 * m1 + k + n) * (m1 + k + n) / (m1 + k + 1)
                     * (m1 + n) / (m1 + 1) * math.exp(-4 * (2 * m1 + 1 + k + n) * t))
            tail = math.exp(_log_majorant(m1, k, n, t)) / (1 - ratio) if ratio < 1 else math.inf
            if tail <= budget:
                break
            m = m1
            if m >= max_terms:
                raise TruncationError(f"m-series for k={k} not certified within {max_terms} terms", tail)
        counts.append(m + 1)
        tail_total += tail
        if k >= 1:
            rho = (k + 1 + n) / (k + 1) * math.exp(-2 * n * t)
            if rho < 1:
                block_sum = math.fsum(math.exp(v) for v in block) + tail
                k_tail = block_sum * rho / (1 - rho)
                if k_tail <= abs_tol / 2:
                    return counts, tail_total + k_tail
        k += 1
        if k >= max_terms:
            raise TruncationError(f"k-series not certified within {max_terms} terms", math.inf)


class SpectralSeries:
    """Truncated eigenfunction expansion at fixed points, reusable over time.

    The truncation is certified for every ``t >= t_floor`` (the majorants
    decrease in t). Spatial factors are computed once; :meth:`__call__`
    only rescales by ``e^{-lambda t}``.
    """

    def __init__(self, n, r, theta, t_floor, trunc: Optional[Truncation] = None):
        if int(n) != n or n < 1:
            raise DomainError(f"n must be a positive integer, got {n}")
        if not t_floor > 0:
            raise DomainError("t must be positive")
        self.n = n
        self.t_floor = t_floor
        self.trunc = trunc or Truncation(abs_tol=1e-14)
        counts, self.tail = _plan(n, t_floor, self.trunc.abs_tol, self.trunc.max_terms)
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        if np.any((r < 0) | (r >= math.pi / 2)):
            raise DomainError("r must lie in [0, pi/2)")
        self.shape = r.shape
        r = r.ravel()
        theta = theta.ravel()
        counts = np.asarray(counts)
        ks = np.arange(len(counts))
        # flattened (m, k) index lists
        self.k = np.repeat(ks, counts)
        self.m = np.concatenate([np.arange(c) for c in counts])
        self.lam = eigenvalue(self.m, self.k, n).astype(float)
        coef = np.exp(
            math.lgamma(n) - math.log(2) - (n + 1) * math.log(math.pi)
            + np.log(2 * self.m + self.k + n) + log_binomial(self.m + self.k + n - 1, n - 1))
        coef = np.where(self.k > 0, 2 * coef, coef)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            jac = _jacobi_grid(n, counts, np.cos(2 * r))  # (terms, points)
            radial = np.cos(r)[None, :] ** self.k[:, None]
            angular = np.cos(self.k[:, None] * theta[None, :])
            self.spatial = coef[:, None] * jac * radial * angular
        if not np.all(np.isfinite(self.spatial)):
            raise TruncationError("spectral terms overflow double precision; "
                                  "relax abs_tol or use a larger t", math.inf)
        self.terms_used = len(self.k)

    def __call__(self, t):
        """Kernel values at time ``t`` (scalar), shaped like the input points."""
        if t < self.t_floor * (1 - 1e-12):
            raise DomainError(f"series certified only for t >= {self.t_floor}")
        weights = np.exp(-self.lam * t)
        vals = compensated_sum(self.spatial * weights[:, None], axis=0)
        vals = np.asarray(vals).reshape(self.shape)
        return vals[()] if vals.ndim == 0 else vals

    def at_times(self, ts):
        """Values at many times at once, shape ``(len(ts),) + point shape``.

        Uses a plain matrix product rather than compensated sums; meant for
        integrands where the time weight damps any cancellation error.
        """
        ts = np.asarray(ts, dtype=float)
        if np.any(ts < self.t_floor * (1 - 1e-12)):
            raise DomainError(f"series certified only for t >= {self.t_floor}")
        with np.errstate(under="ignore"):
            weights = np.exp(-np.outer(ts, self.lam))
        return (weights @ self.spatial).reshape(ts.shape + self.shape)

    def truncation(self):
        return self.trunc.report(self.terms_used, self.tail)


def _jacobi_grid(n, counts, x):
    """``P_m^{(n-1,k)}(x)`` for every (m, k) with ``m < counts[k]``, in flattened order."""
    alpha = n - 1.0
    K = len(counts)
    beta = np.arange(K, dtype=float)[:, None]
    mmax = int(max(counts))
    rows = [np.empty((c, len(x))) for c in counts]
    older = newer = None
    for m in range(mmax):
        if m == 0:
            cur = np.ones((K, len(x)))
        elif m == 1:
            cur = (alpha + 1) + 0.5 * (alpha + beta + 2) * (x[None, :] - 1)
        else:
            c = 2 * m + alpha + beta
            denom = 2 * m * (m + alpha + beta) * (c - 2)
            cur = ((c - 1) * (c * (c - 2) * x[None, :] + alpha ** 2 - beta ** 2) * newer
                   - 2 * (m + alpha - 1) * (m + beta - 1) * c * older) / denom
        older, newer = newer, cur
        for k in np.nonzero(counts > m)[0]:
            rows[k][m] = cur[k]
    return np.concatenate(rows, axis=0)


def p_spectral_array(n, r, theta, t, trunc: Optional[Truncation] = None):
    """Vectorised spectral evaluation; returns ``(values, Truncation)``."""
    series = SpectralSeries(n, r, theta, t, trunc)
    return series(t), series.truncation()


def p_spectral(coord: CylCoord, t, trunc: Optional[Truncation] = None) -> KernelValue:
    """Kernel from the eigenfunction expansion.

    ``Gamma(n)/(2 pi^{n+1}) sum_k sum_m (2m+|k|+n) binomial(m+|k|+n-1, n-1)
    e^{-lambda_{m,k} t} cos(k theta) cos(r)^|k| P_m^{(n-1,|k|)}(cos 2r)``,
    with the ``k`` and ``-k`` terms paired so the value is exactly real and
    even in ``theta``. The discarded tail is certified below ``trunc.abs_tol``.
    """
    value, tr = p_spectral_array(coord.n, coord.r, coord.theta, t, trunc)
    return KernelValue(float(value), "spectral", tr.tail_bound, tr)


def _integral_window(n, t, r, theta, shift0, target):
    """Half-width Y of the y-window and an estimate of the discarded tail.

    The envelope ``|integrand|`` decays exponentially once ``cos r cosh y > 1``
    (like ``e^{-n|y|}`` at r = 0, faster otherwise); the tail beyond Y is
    estimated as ``2 env(Y) / kappa`` with ``kappa`` the observed log-slope.
    """
    c = math.cos(r)

    def env(y):
        val, _ = q_spectral(n, t, c * math.cosh(y), Truncation(max_terms=20000, abs_tol=1e-300),
                            log_shift=y * y / (4 * t) - shift0)
        return abs(val) / math.sqrt(4 * math.pi * t)

    Y = max(6 * math.sqrt(t) + abs(theta), 1.0)
    prev = env(Y)
    step = 1.0
    while True:
        Y1 = Y + step
        cur = env(Y1)
        if cur > 0 and prev > cur:
            kappa = math.log(prev / cur) / step
            tail = 2 * cur / kappa
            if tail <= target:
                return Y1, tail
        elif cur == 0.0:
            return Y1, 0.0
        Y, prev = Y1, cur
        if Y > 2000:
            raise ConvergenceError("could not bound the tail of the y-integral", tail if cur else math.inf)


def p_integral(coord: CylCoord, t, quad: Optional[QuadratureSpec] = None,
               t_min: float = T_MIN_INTEGRAL) -> KernelValue:
    """Kernel from the integral over the fibre variable.

    ``(4 pi t)^{-1/2} Re int_{-Y}^{Y} e^{-(y + i theta)^2/4t} q_t(cos r cosh y) dy``.
    The Gaussian weight is folded into the Gegenbauer series of ``q_t``, so
    the integrand never overflows. ``error_estimate`` is the quadrature
    error plus the window tail plus the modulus of the (vanishing)
    imaginary part.

    Raises
    ------
    RegimeError
        For ``t < t_min``: the oscillating factor ``e^{-i y theta/2t}``
        against ``e^{theta^2/4t}`` makes the quadrature lose every digit;
        use the small-time asymptotics there.
    """
    if t < t_min:
        raise RegimeError(f"t={t} below the integral representation floor {t_min}; "
                          "use crsphere.geodesy small-time asymptotics")
    quad = quad or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11)
    n, r, theta = coord.n, coord.r, coord.theta
    shift0 = theta * theta / (4 * t)
    Y, tail = _integral_window(n, t, r, theta, shift0, 0.1 * quad.abs_tol)
    c = math.cos(r)
    norm = 1.0 / math.sqrt(4 * math.pi * t)
    q_tol = Truncation(max_terms=20000, abs_tol=0.01 * quad.abs_tol / (2 * Y * norm))
    trunc_seen = []

    def integrand(y):
        val, tr = q_spectral(n, t, c * np.cosh(y), q_tol, log_shift=y * y / (4 * t) - shift0)
        trunc_seen.append(tr)
        return norm * np.exp(-1j * y * theta / (2 * t)) * val

    spec = quad.with_window(-Y, Y, tail)
    res = integrate(integrand, -Y, Y, spec, initial=max(2, int(2 * Y)))
    value = complex(res.value)
    q_tail = max(tr.tail_bound for tr in trunc_seen) * 2 * Y * norm
    err = res.error + q_tail + abs(value.imag)
    if abs(value.imag) > max(quad.abs_tol, quad.rel_tol * abs(value.real), res.error):
        raise ConvergenceError(f"imaginary part {value.imag:.3e} did not cancel", abs(value.imag))
    trunc = Truncation(max_terms=q_tol.max_terms, abs_tol=q_tol.abs_tol,
                       terms_used=max(tr.terms_used for tr in trunc_seen),
                       tail_bound=q_tail)
    return KernelValue(value.real, "integral", err, trunc)
