"""Jacobi and Gegenbauer polynomials and the combinatorics the kernel series need."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

__all__ = [
    "JacobiParams",
    "GegenbauerParams",
    "jacobi",
    "jacobi_derivative",
    "jacobi_eigen_residual",
    "jacobi_table",
    "gegenbauer",
    "jacobi_norm",
    "log_jacobi_norm",
    "binomial",
    "log_binomial",
    "double_factorial",
    "cosh_power_integral",
]

# float(math.comb) is exact below 2**53 and finite below ~1e308
_EXACT_BINOMIAL_LIMIT = 1000


def _check_degree(m):
    if int(m) != m or m < 0:
        raise DomainError(f"degree must be a non-negative integer, got {m}")


@dataclass(frozen=True)
class JacobiParams:
    m: int
    alpha: float
    beta: float

    def __post_init__(self):
        _check_degree(self.m)
        if not (self.alpha > -1 and self.beta > -1):
            raise DomainError(f"need alpha, beta > -1, got ({self.alpha}, {self.beta})")


@dataclass(frozen=True)
class GegenbauerParams:
    m: int
    n: int

    def __post_init__(self):
        _check_degree(self.m)
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")


def jacobi_table(m_max, alpha, beta, x):
    """All Jacobi polynomials ``P_0 .. P_{m_max}`` with parameters (alpha, beta) at ``x``.

    Uses the three-term recurrence in the degree. ``x`` may be any real or
    complex array; the result has shape ``(m_max + 1,) + x.shape``.
    """
    _check_degree(m_max)
    if not (alpha > -1 and beta > -1):
        raise DomainError(f"need alpha, beta > -1, got ({alpha}, {beta})")
    x = np.asarray(x)
    dtype = np.result_type(x.dtype, float)
    out = np.empty((m_max + 1,) + x.shape, dtype=dtype)
    out[0] = 1.0
    if m_max == 0:
        return out
    ab = alpha + beta
    out[1] = (alpha + 1) + 0.5 * (ab + 2) * (x - 1)
    a2b2 = alpha * alpha - beta * beta
    for m in range(2, m_max + 1):
        c = 2 * m + ab
        denom = 2 * m * (m + ab) * (c - 2)
        out[m] = ((c - 1) * (c * (c - 2) * x + a2b2) * out[m - 1]
                  - 2 * (m + alpha - 1) * (m + beta - 1) * c * out[m - 2]) / denom
    return out


def jacobi(m, alpha, beta=None, x=None):
    """Jacobi polynomial ``P_m^{(alpha, beta)}(x)``.

    Called either as ``jacobi(m, alpha, beta, x)`` or ``jacobi(params, x)``.
    """
    if isinstance(m, JacobiParams):
        m, alpha, beta, x = m.m, m.alpha, m.beta, alpha
    _check_degree(m)
    res = jacobi_table(int(m), alpha, beta, x)[-1]
    return res[()] if res.ndim == 0 else res


def jacobi_derivative(m, alpha, beta, x, order=1):
    """``d^order/dx^order P_m^{(alpha,beta)}``, exactly, via
    ``P_m' = (m + alpha + beta + 1)/2 P_{m-1}^{(alpha+1, beta+1)}``."""
    _check_degree(m)
    scale = 1.0
    for j in range(order):
        if m - j == 0:
            return np.zeros_like(np.asarray(x, dtype=float))[()]
        scale *= 0.5 * (m + alpha + beta + 1 + j)
    return scale * jacobi(m - order, alpha + order, beta + order, x)


def jacobi_eigen_residual(m, n, k, x):
    """``Psi_k P + m(m+n+|k|) P`` for ``P = P_m^{(n-1,|k|)}``, with
    ``Psi_k = (1-x^2) d^2 + ((|k|+1-n) - (|k|+1+n) x) d``; zero up to roundoff."""
    k = abs(k)
    x = np.asarray(x, dtype=float)
    p = jacobi(m, n - 1, k, x)
    d1 = jacobi_derivative(m, n - 1, k, x, 1)
    d2 = jacobi_derivative(m, n - 1, k, x, 2)
    return (1 - x * x) * d2 + ((k + 1 - n) - (k + 1 + n) * x) * d1 + m * (m + n + k) * p


def gegenbauer(m, n, x=None):
    """Gegenbauer polynomial ``C_m^n(x)`` with the standard normalisation ``C_1^n = 2 n x``.

    ``n`` is a positive integer here (the half-dimension of the sphere).
    Evaluated by ``m C_m = 2x(m+n-1) C_{m-1} - (m+2n-2) C_{m-2}``.
    Also accepts ``gegenbauer(params, x)``.
    """
    if isinstance(m, GegenbauerParams):
        m, n, x = m.m, m.n, n
    _check_degree(m)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    x = np.asarray(x)
    prev = np.ones_like(x, dtype=np.result_type(x.dtype, float))
    if m == 0:
        return prev[()] if prev.ndim == 0 else prev
    cur = 2.0 * n * x
    for j in range(2, int(m) + 1):
        prev, cur = cur, (2.0 * x * (j + n - 1) * cur - (j + 2 * n - 2) * prev) / j
    cur = np.asarray(cur)
    return cur[()] if cur.ndim == 0 else cur


def log_binomial(a, b):
    """``log binomial(a, b)`` through log-gamma; valid for array arguments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def binomial(a, b):
    """Binomial coefficient of non-negative integers as a float.

    Exact integer arithmetic below a size threshold, log-gamma above it.
    """
    if a < _EXACT_BINOMIAL_LIMIT:
        return float(math.comb(int(a), int(b)))
    return float(np.exp(log_binomial(a, b)))


def log_jacobi_norm(m, n, k):
    k = abs(k)
    return ((n + k) * math.log(2) - math.log(2 * m + k + n)
            + math.lgamma(m + n) + math.lgamma(m + k + 1)
            - math.lgamma(m + 1) - math.lgamma(m + n + k))


def jacobi_norm(m, n, k):
    """Squared norm of ``P_m^{(n-1, |k|)}`` for the weight ``(1-x)^(n-1) (1+x)^|k|`` on [-1, 1].

    ``2^(n+|k|)/(2m+|k|+n) * G(m+n) G(m+|k|+1) / (G(m+1) G(m+n+|k|))``,
    evaluated through log-gamma differences.
    """
    _check_degree(m)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return math.exp(log_jacobi_norm(m, n, k))


def double_factorial(j):
    """``j!!`` with the conventions ``0!! = (-1)!! = 1``."""
    if int(j) != j or j < -1:
        raise DomainError(f"double factorial needs an integer >= -1, got {j}")
    out = 1
    for i in range(int(j), 0, -2):
        out *= i
    return out


def cosh_power_integral(n):
    """``int_{-inf}^{inf} dy / cosh(y)^n`` for a positive integer ``n``.

    Odd n: ``pi (n-2)!!/(n-1)!!``; even n: ``2 (n-2)!!/(n-1)!!``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    ratio = double_factorial(n - 2) / double_factorial(n - 1)
    return (math.pi if n % 2 else 2.0) * ratio
