"""Shared numerical services.

Adaptive Gauss-Kronrod quadrature, bracketed root finding, compensated
summation and fourth-order finite differences. Improper integrals are never
truncated here: callers pick a finite window and report their own tail
bound through :class:`QuadratureSpec`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import mpmath
import numpy as np

from .errors import DomainError, QuadratureError, RootFindingError

__all__ = [
    "QuadratureSpec",
    "QuadratureResult",
    "kronrod_rule",
    "integrate",
    "find_root",
    "fd_derivative",
    "compensated_sum",
]

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for one adaptive integration.

    ``window`` and ``tail_bound`` are filled in by callers that truncate an
    improper integral; the bound is added to the reported error.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdiv: int = 4000
    window: Optional[tuple[float, float]] = None
    tail_bound: float = 0.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.max_subdiv < 1:
            raise DomainError("max_subdiv must be >= 1")

    def with_window(self, a, b, tail_bound=0.0):
        return QuadratureSpec(self.abs_tol, self.rel_tol, self.max_subdiv,
                              (float(a), float(b)), float(tail_bound))


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float
    error: float
    intervals: int
    evaluations: int


@functools.lru_cache(maxsize=None)
def kronrod_rule(n=10):
    """Gauss-Legendre ``n``-point rule and its ``2n+1``-point Kronrod extension.

    Returns ``(nodes, kronrod_weights, gauss_weights)`` on [-1, 1]; the Gauss
    weights are zero at the Kronrod-only nodes. Computed once in 50-digit
    arithmetic: the Stieltjes polynomial is obtained from its orthogonality
    conditions against ``P_n * x**j`` and the weights from the moment system.
    """
    with mpmath.workdps(50):
        legendre = mpmath.taylor(lambda x: mpmath.legendre(n, x), 0, n)
        # monic Stieltjes polynomial E_{n+1}, same parity as n+1
        free = [j for j in range(n + 1) if (j - (n + 1)) % 2 == 0]

        def moment(p):
            return mpmath.mpf(2) / (p + 1) if p % 2 == 0 else mpmath.mpf(0)

        def inner(power):
            # int_{-1}^{1} P_n(x) x**power dx
            return mpmath.fsum(c * moment(i + power) for i, c in enumerate(legendre))

        conds = [j for j in range(n + 1) if (j + n + (n + 1)) % 2 == 0]
        A = mpmath.matrix(len(conds), len(free))
        rhs = mpmath.matrix(len(conds), 1)
        for row, j in enumerate(conds):
            for col, p in enumerate(free):
                A[row, col] = inner(p + j)
            rhs[row] = -inner(n + 1 + j)
        coef = mpmath.lu_solve(A, rhs)
        stieltjes = [mpmath.mpf(0)] * (n + 2)
        stieltjes[n + 1] = mpmath.mpf(1)
        for col, p in enumerate(free):
            stieltjes[p] = coef[col]

        gauss = sorted(mpmath.re(z) for z in mpmath.polyroots(legendre[::-1], maxsteps=200, extraprec=200))
        extra = sorted(mpmath.re(z) for z in mpmath.polyroots(stieltjes[::-1], maxsteps=200, extraprec=200))
        nodes = sorted(gauss + extra)

        def weights_for(xs):
            V = mpmath.matrix(len(xs), len(xs))
            b = mpmath.matrix(len(xs), 1)
            for p in range(len(xs)):
                for i, x in enumerate(xs):
                    V[p, i] = x ** p
                b[p] = moment(p)
            return mpmath.lu_solve(V, b)

        wk = weights_for(nodes)
        wg_sub = weights_for(gauss)
        wg = [mpmath.mpf(0)] * len(nodes)
        for g, w in zip(gauss, wg_sub):
            idx = min(range(len(nodes)), key=lambda i: abs(nodes[i] - g))
            wg[idx] = w
        return (np.array([float(x) for x in nodes]),
                np.array([float(w) for w in wk]),
                np.array([float(w) for w in wg]))


def _apply_rule(f, lo, hi):
    """Kronrod and Gauss estimates on a batch of intervals."""
    x, wk, wg = kronrod_rule()
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(pts.ravel())).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand is not finite on the window")
    k = half * (vals @ wk)
    g = half * (vals @ wg)
    absv = np.abs(vals)
    resabs = np.abs(half) * (absv @ wk)
    mean = k / np.where(half == 0, 1.0, 2 * half)
    resasc = np.abs(half) * (np.abs(vals - mean[:, None]) @ wk)
    err = np.abs(k - g)
    # QUADPACK error scaling for smooth integrands
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    floor = 50.0 * EPS * resabs
    return k, np.maximum(err, floor), floor


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              spec: QuadratureSpec = QuadratureSpec(), initial: int = 1) -> QuadratureResult:
    """Globally adaptive 21-point Gauss-Kronrod quadrature of ``f`` over [a, b].

    ``f`` must accept a 1-D array of abscissae and return values of the same
    shape (real or complex). Intervals are bisected in batches, always
    splitting every interval whose error exceeds its length-proportional
    share of the tolerance. The error reported includes ``spec.tail_bound``.

    Raises
    ------
    QuadratureError
        If ``spec.max_subdiv`` intervals are exhausted before the
        tolerance ``max(abs_tol, rel_tol*|I|)`` is met.
    """
    a = float(a)
    b = float(b)
    if a == b:
        return QuadratureResult(0.0, spec.tail_bound, 0, 0)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    npts = len(kronrod_rule()[0])
    edges = np.linspace(a, b, initial + 1)
    lo, hi = edges[:-1], edges[1:]
    val, err, floor = _apply_rule(f, lo, hi)
    evaluations = npts * len(lo)
    length = b - a
    while True:
        total = val.sum()
        total_err = err.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= tol + floor.sum():
            break
        share = 0.5 * tol * (hi - lo) / length
        split = (err > share) & (err > floor)
        if not split.any():
            raise QuadratureError(
                f"roundoff limits the estimate to {total_err:.3e} (> {tol:.3e})", total_err)
        if len(lo) + split.sum() > spec.max_subdiv:
            raise QuadratureError(
                f"subdivision budget exhausted with error {total_err:.3e} (> {tol:.3e})", total_err)
        keep = ~split
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nv, ne, nf = _apply_rule(f, new_lo, new_hi)
        evaluations += npts * len(new_lo)
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
        floor = np.concatenate([floor[keep], nf])
    value = sign * compensated_sum(val)
    return QuadratureResult(value, float(total_err) + spec.tail_bound, len(lo), evaluations)


def find_root(g: Callable[[float], float], a: float, b: float, tol: float = 1e-13,
              dg: Optional[Callable[[float], float]] = None, polish_width: float = 1e-3,
              max_iter: int = 200) -> float:
    """Root of a monotone function on the bracket [a, b].

    Bisection shrinks the bracket to ``polish_width``; then Newton steps
    (with ``dg``) or Illinois false-position steps take over. Any step that
    would leave the current bracket falls back to bisection, so the result
    always lies in [a, b]. The iteration stops once ``|g(x)| <= tol`` or
    the bracket has collapsed to adjacent floating-point numbers.
    """
    ga, gb = g(a), g(b)
    if ga == 0:
        return a
    if gb == 0:
        return b
    if np.sign(ga) == np.sign(gb):
        raise RootFindingError(f"g does not change sign on [{a}, {b}]",
                               signs=(float(np.sign(ga)), float(np.sign(gb))))
    lo, hi, glo, ghi = (a, b, ga, gb)
    x = 0.5 * (lo + hi)
    gx = g(x)
    side = 0
    for _ in range(max_iter):
        if abs(gx) <= tol:
            return x
        if np.sign(gx) == np.sign(glo):
            lo, glo = x, gx
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi, ghi = x, gx
            if side == 1:
                glo *= 0.5
            side = 1
        if hi - lo <= 4 * EPS * max(1.0, abs(lo), abs(hi)):
            return x
        if hi - lo > polish_width:
            x = 0.5 * (lo + hi)
        else:
            if dg is not None:
                d = dg(x)
                cand = x - gx / d if d != 0 else math.nan
            else:
                cand = (lo * ghi - hi * glo) / (ghi - glo)
            x = cand if lo < cand < hi else 0.5 * (lo + hi)
        gx = g(x)
    raise RootFindingError("root refinement did not converge", achieved=abs(gx))


_STENCILS = {
    1: (np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 1),
    2: (np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 2),
}


def fd_derivative(f: Callable[[float], float], x: float, order: int = 1,
                  h: Optional[float] = None) -> tuple[float, float]:
    """Fourth-order central difference of ``f`` at ``x``.

    Returns ``(derivative, error_estimate)``; the estimate is the Richardson
    difference between steps ``h`` and ``2h`` divided by 15.
    """
    if order not in _STENCILS:
        raise DomainError("order must be 1 or 2")
    if h is None:
        h = default_step(x)
    coef, power = _STENCILS[order]
    offsets = np.arange(-2, 3)

    def stencil(step):
        vals = [f(x + o * step) if c != 0 else 0.0 for o, c in zip(offsets, coef)]
        return math.fsum(c * v for c, v in zip(coef, vals)) / step ** power

    d1 = stencil(h)
    d2 = stencil(2 * h)
    return d1, abs(d1 - d2) / 15.0


def default_step(x: float) -> float:
    """Step balancing truncation and roundoff for fourth-order stencils."""
    return max(1e-3, EPS ** (1.0 / 6.0)) * max(1.0, abs(x))


def compensated_sum(values, axis: int = -1):
    """Correctly rounded sum along ``axis`` (``math.fsum`` per lane).

    Complex input is summed separately in its real and imaginary parts.
    """
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        return compensated_sum(arr.real, axis) + 1j * compensated_sum(arr.imag, axis)
    if arr.ndim == 0:
        return float(arr)
    if arr.ndim == 1:
        return math.fsum(arr.tolist())
    moved = np.moveaxis(arr, axis, -1)
    flat = moved.reshape(-1, moved.shape[-1])
    out = np.fromiter((math.fsum(row) for row in flat.tolist()), dtype=float, count=flat.shape[0])
    return out.reshape(moved.shape[:-1])
