"""Riemannian heat kernel ``q_t`` of the unit sphere S^{2n+1}.

``q_t`` is a function of ``cos(delta)`` where ``delta`` is the Riemannian
distance to the north pole. Three evaluators:

* :func:`q_spectral` -- the Gegenbauer eigenfunction series, entire in its
  argument, so it also serves arguments above 1 and complex arguments;
* :func:`q_theta` -- ``e^{n^2 t} ((2 pi)^{-1} d/dx)^n`` applied to the
  periodised Gaussian, written in ``x = cos(delta)``; an independent check;
* :func:`q_small_time` -- the two-term small-time expansion.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import mpmath
import numpy as np

from .errors import DomainError, TruncationError
from .special import log_binomial

__all__ = [
    "RiemannKernelQuery",
    "Truncation",
    "q_spectral",
    "q_theta",
    "q_theta_x_derivative",
    "q_small_time",
    "q_uniform_limit",
]


@dataclass(frozen=True)
class Truncation:
    """Series cutoff policy and, on return, what was actually used.

    ``tail_bound`` is a rigorous majorant of the discarded terms.
    """

    max_terms: int = 2000
    abs_tol: float = 1e-15
    terms_used: int = 0
    tail_bound: float = 0.0

    def report(self, terms_used, tail_bound):
        return replace(self, terms_used=int(terms_used), tail_bound=float(tail_bound))


@dataclass(frozen=True)
class RiemannKernelQuery:
    """Evaluation request for ``q_t(arg)``; ``arg = cos(delta)`` or its continuation."""

    n: int
    t: float
    arg: complex

    def __post_init__(self):
        _check_n_t(self.n, self.t)


def _check_n_t(n, t):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")


def q_uniform_limit(n):
    """``Gamma(n+1) / (2 pi^{n+1})``, the inverse volume of S^{2n+1}."""
    return math.gamma(n + 1) / (2 * math.pi ** (n + 1))


def q_spectral(n, t=None, arg=None, trunc=None, log_shift=0.0, dps=None):
    """Gegenbauer series for ``q_t(arg)``.

    ``Gamma(n)/(2 pi^{n+1}) * sum_m (m+n) e^{-m(m+2n)t} C_m^n(arg)``.

    ``arg`` may be a real or complex array. Terms are generated from the
    scaled recurrence for ``C_m^n(arg) e^{-m a}`` with
    ``a = |Im arccos(arg)|``, so arguments ``cosh a`` with large ``a`` do
    not overflow. The returned values are multiplied by ``exp(-log_shift)``
    (``log_shift`` broadcasts against ``arg``), which lets callers fold a
    Gaussian weight into the sum.

    The tail is bounded with ``|C_m^n(arg)| <= binomial(m+2n-1, m) e^{m a}``;
    summation stops once the geometric bound on the remaining terms of
    every element is below ``trunc.abs_tol``.

    ``n`` may also be a :class:`RiemannKernelQuery`, in which case ``t`` is
    the truncation policy: ``q_spectral(query, trunc)``.

    With ``dps`` set, each element is summed in ``dps``-digit arithmetic.
    Needed when ``q_t`` is far below the size of the individual terms
    (small ``t``, ``delta`` near pi), where float64 only gives an absolute
    accuracy of order ``eps * q_t(1)``.

    Returns
    -------
    value, Truncation
        ``value`` has the shape of the broadcast inputs; real when ``arg``
        is real.

    Raises
    ------
    TruncationError
        If ``trunc.max_terms`` terms do not reach the tolerance.
    """
    if isinstance(n, RiemannKernelQuery):
        n, t, arg, trunc = n.n, n.t, n.arg, t
    _check_n_t(n, t)
    trunc = trunc or Truncation()
    if dps is not None:
        return _q_spectral_mp(n, t, arg, trunc, log_shift, dps)
    x = np.asarray(arg)
    shift = np.asarray(log_shift, dtype=float)
    x, shift = np.broadcast_arrays(x, shift)
    complex_arg = np.iscomplexobj(x)
    xc = x.astype(complex)
    a = np.abs(np.arccos(xc).imag)
    pref = math.gamma(n) / (2 * math.pi ** (n + 1))
    decay = np.exp(-a)
    two_x = 2.0 * (xc if complex_arg else x.astype(float)) * decay
    decay2 = decay * decay

    prev = None
    cur = np.ones(x.shape, dtype=two_x.dtype)
    total = np.zeros(x.shape, dtype=two_x.dtype)
    tail = np.full(x.shape, np.inf)
    m = 0
    while True:
        expo = -m * (m + 2 * n) * t + m * a - shift
        total = total + (m + n) * np.exp(expo) * cur
        # majorant of term m+1 and ratio of consecutive majorant terms beyond
        m1 = m + 1
        with np.errstate(over="ignore"):
            ratio = ((m1 + 1 + n) / (m1 + n) * (m1 + 2 * n) / (m1 + 1)
                     * np.exp(-(2 * m1 + 1 + 2 * n) * t + a))
        log_major = (np.log(pref * (m1 + n)) + log_binomial(m1 + 2 * n - 1, m1)
                     - m1 * (m1 + 2 * n) * t + m1 * a - shift)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            tail = np.where(ratio < 1, np.exp(log_major) / (1 - np.minimum(ratio, 1)), np.inf)
        if np.all(tail <= trunc.abs_tol):
            break
        if m1 >= trunc.max_terms:
            raise TruncationError(
                f"Gegenbauer tail {np.max(tail):.3e} above {trunc.abs_tol:.3e} after {m1} terms",
                float(np.max(tail)))
        if m == 0:
            nxt = 2.0 * n * (xc if complex_arg else x) * decay
        else:
            nxt = (two_x * (m1 + n - 1) * cur - (m1 + 2 * n - 2) * decay2 * prev) / m1
        prev, cur = cur, nxt
        m = m1
    value = pref * total
    if not complex_arg:
        value = value.real if np.iscomplexobj(value) else value
    value = value[()] if value.ndim == 0 else value
    return value, trunc.report(m + 1, float(np.max(tail)))


def _q_spectral_mp(n, t, arg, trunc, log_shift, dps):
    x = np.asarray(arg)
    shift = np.broadcast_to(np.asarray(log_shift, dtype=float), x.shape)
    out = np.empty(x.shape, dtype=complex if np.iscomplexobj(x) else float)
    worst_tail, worst_terms = 0.0, 0
    with mpmath.workdps(dps):
        pref = mpmath.gamma(n) / (2 * mpmath.pi ** (n + 1))
        t = mpmath.mpf(t)
        for idx in np.ndindex(x.shape):
            z = mpmath.mpmathify(complex(x[idx]) if np.iscomplexobj(x) else float(x[idx]))
            a = abs(mpmath.im(mpmath.acos(z)))
            sh = mpmath.mpf(float(shift[idx]))
            prev, cur = None, mpmath.mpf(1)
            total = mpmath.mpf(0)
            m = 0
            while True:
                total += (m + n) * mpmath.exp(-m * (m + 2 * n) * t - sh) * cur
                m1 = m + 1
                major = (pref * (m1 + n) * mpmath.binomial(m1 + 2 * n - 1, m1)
                         * mpmath.exp(-m1 * (m1 + 2 * n) * t + m1 * a - sh))
                ratio = ((m1 + 1 + n) / mpmath.mpf(m1 + n) * (m1 + 2 * n) / (m1 + 1)
                         * mpmath.exp(-(2 * m1 + 1 + 2 * n) * t + a))
                tail = major / (1 - ratio) if ratio < 1 else mpmath.inf
                if tail <= trunc.abs_tol:
                    break
                if m1 >= trunc.max_terms:
                    raise TruncationError("Gegenbauer tail above tolerance", float(tail))
                if m == 0:
                    nxt = 2 * n * z
                else:
                    nxt = (2 * z * (m1 + n - 1) * cur - (m1 + 2 * n - 2) * prev) / m1
                prev, cur = cur, nxt
                m = m1
            val = pref * total
            out[idx] = complex(val) if np.iscomplexobj(x) else float(mpmath.re(val))
            worst_tail = max(worst_tail, float(tail))
            worst_terms = max(worst_terms, m + 1)
    value = out[()] if out.ndim == 0 else out
    return value, trunc.report(worst_terms, worst_tail)


# --- theta-function representation -------------------------------------------------

@functools.lru_cache(maxsize=None)
def _theta_monomials(order):
    """Expansion of ``D^order g`` with ``D = -(1/sin d) d/dd`` and ``g = e^{-s^2/4t}``.

    Keys ``(a, b, p, q)`` stand for ``s^a t^{-b} sin(d)^{-p} cos(d)^q g``
    with ``s = d - 2 k pi``; values are exact rational coefficients.
    """
    terms = {(0, 0, 0, 0): Fraction(1)}
    for _ in range(order):
        out = {}

        def add(key, c):
            out[key] = out.get(key, Fraction(0)) + c

        for (a, b, p, q), c in terms.items():
            # derivative in d, then multiplication by -1/sin(d)
            if a:
                add((a - 1, b, p + 1, q), -c * a)
            add((a + 1, b + 1, p + 1, q), c / 2)
            if p:
                add((a, b, p + 2, q + 1), c * p)
            if q:
                add((a, b, p, q - 1), c * q)
        terms = {k: v for k, v in out.items() if v != 0}
    return tuple(sorted(terms.items()))


def _theta_derivative_mp(order, t, delta):
    """``d^order/dx^order`` of ``V(t, arccos x)`` at ``x = cos(delta)``, in mpmath."""
    t = mpmath.mpf(t)
    d = mpmath.mpf(delta)
    sin_d, cos_d = mpmath.sin(d), mpmath.cos(d)
    reach = math.sqrt(4 * float(t) * math.log(1e16)) + 2 * math.pi
    kmin = math.ceil((float(delta) - reach) / (2 * math.pi))
    kmax = math.floor((float(delta) + reach) / (2 * math.pi))
    monomials = _theta_monomials(order)
    norm = 1 / mpmath.sqrt(4 * mpmath.pi * t)
    total = mpmath.mpf(0)
    for k in range(kmin, kmax + 1):
        s = d - 2 * k * mpmath.pi
        g = mpmath.exp(-s * s / (4 * t))
        acc = mpmath.mpf(0)
        for (a, b, p, q), c in monomials:
            acc += (mpmath.mpf(c.numerator) / c.denominator) * s ** a / t ** b \
                / sin_d ** p * cos_d ** q
        total += acc * g
    return total * norm


def _theta_dps(n, t, delta):
    # guard digits for the cancellation of the low Fourier modes (~e^{n^2 t})
    # and of the 1/sin(delta) powers
    return 30 + int(n * n * t / math.log(10)) + int(2 * n * max(0.0, -math.log10(math.sin(delta))))


def q_theta(n, t, delta):
    """``q_t(cos delta)`` from the periodised Gaussian ``V(t, delta)``.

    ``e^{n^2 t} (2 pi)^{-n} d^n/dx^n V`` with ``x = cos(delta)``; each
    Gaussian summand is differentiated exactly and the sum is evaluated in
    extended precision. Summands with ``|delta - 2k pi| > sqrt(4t ln 1e16) + 2pi``
    are dropped.
    """
    _check_n_t(n, t)
    if n > 4:
        raise DomainError("q_theta supports n <= 4")
    if not 0 < delta < math.pi:
        raise DomainError(f"delta must lie in (0, pi), got {delta}")
    with mpmath.workdps(_theta_dps(n, t, delta)):
        val = _theta_derivative_mp(n, t, delta)
        val *= mpmath.exp(n * n * mpmath.mpf(t)) / (2 * mpmath.pi) ** n
        return float(val)


def q_theta_x_derivative(n, t, delta):
    """``d/dx q_t(x)`` at ``x = cos(delta)`` by the same exact term-wise route."""
    _check_n_t(n, t)
    if not 0 < delta < math.pi:
        raise DomainError(f"delta must lie in (0, pi), got {delta}")
    with mpmath.workdps(_theta_dps(n + 1, t, delta)):
        val = _theta_derivative_mp(n + 1, t, delta)
        val *= mpmath.exp(n * n * mpmath.mpf(t)) / (2 * mpmath.pi) ** n
        return float(val)


# --- small time ------------------------------------------------------------------------

def _curvature_ratio(delta):
    """``(sin d - d cos d) / (d^2 sin d)``, continuous at 0 with value 1/3."""
    delta = np.asarray(delta, dtype=float)
    small = np.abs(delta) < 1e-3
    d = np.where(small, 1.0, delta)
    exact = (np.sin(d) - d * np.cos(d)) / (d * d * np.sin(d))
    return np.where(small, 1.0 / 3.0 + delta * delta / 45.0, exact)


def _sinc_ratio(delta):
    """``delta / sin(delta)`` with the removable singularity at 0 filled in."""
    delta = np.asarray(delta, dtype=float)
    small = np.abs(delta) < 1e-4
    d = np.where(small, 1.0, delta)
    return np.where(small, 1.0 + delta * delta / 6.0, d / np.sin(d))


def q_small_time(n, t, delta):
    """Two-term small-time expansion of ``q_t(cos delta)`` for ``delta`` in [0, pi).

    ``(4 pi t)^{-(n+1/2)} (d/sin d)^n e^{-d^2/4t} [1 + (n^2 - n(n-1) R(d)) t]``
    with ``R(d) = (sin d - d cos d)/(d^2 sin d)``. The correction blows up
    as ``delta -> pi``; accuracy is only claimed up to ``pi - 0.05``.
    """
    _check_n_t(n, t)
    delta = np.asarray(delta, dtype=float)
    if np.any((delta < 0) | (delta >= math.pi)):
        raise DomainError("delta must lie in [0, pi)")
    corr = 1.0 + (n * n - n * (n - 1) * _curvature_ratio(delta)) * t
    out = (4 * math.pi * t) ** (-(n + 0.5)) * _sinc_ratio(delta) ** n * np.exp(-delta ** 2 / (4 * t)) * corr
    return out[()] if out.ndim == 0 else out
