"""Radial operators in cylindrical coordinates, the measure ``mu_r`` and PDE residuals.

In the coordinates ``(r, theta)`` adapted to the Hopf fibration the radial
part of the sub-Laplacian is

    L~ = d_rr + ((2n-1) cot r - tan r) d_r + tan^2 r d_thth

and the radial Laplace-Beltrami operator has ``1/cos^2 r`` in place of
``tan^2 r``. Derivatives are fourth-order central differences; each
application also returns a Richardson error estimate from the ``2h`` stencil.
Fields are callables ``f(r, theta)`` that broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import ConvergenceError, DomainError
from .numerics import QuadratureSpec, default_step, integrate

__all__ = [
    "FDValue",
    "RadialGrid",
    "radial_drift",
    "apply_L_tilde",
    "apply_delta_r",
    "mu_density",
    "mu_integral",
    "sphere_volume",
    "heat_residual",
    "green_residual",
]

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

# integer weights (divided by 12 afterwards) so constants cancel exactly
_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0])
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0])
_OFFSETS = np.arange(-2, 3)


class FDValue(NamedTuple):
    value: float | np.ndarray
    error: float | np.ndarray


@dataclass(frozen=True)
class RadialGrid:
    """Tensor grid in ``(r, theta)`` with an optional field sampled on it."""

    r_nodes: np.ndarray
    theta_nodes: np.ndarray
    values: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r_nodes, dtype=float)
        th = np.asarray(self.theta_nodes, dtype=float)
        if r.ndim != 1 or th.ndim != 1 or r.size == 0 or th.size == 0:
            raise DomainError("grid nodes must be non-empty 1-d arrays")
        if np.any(np.diff(r) <= 0) or r[0] <= 0 or r[-1] >= math.pi / 2:
            raise DomainError("r nodes must increase strictly inside (0, pi/2)")
        if np.any(np.abs(th) > math.pi):
            raise DomainError("theta nodes must lie in [-pi, pi]")
        r.flags.writeable = False
        th.flags.writeable = False
        object.__setattr__(self, "r_nodes", r)
        object.__setattr__(self, "theta_nodes", th)
        if self.values is not None:
            v = np.array(self.values, dtype=float)
            if v.shape != (r.size, th.size):
                raise DomainError(f"values must have shape {(r.size, th.size)}, got {v.shape}")
            v.flags.writeable = False
            object.__setattr__(self, "values", v)

    @classmethod
    def interior(cls, n_r, n_theta, margin=0.1):
        """``n_r`` radii in [margin, pi/2 - margin] and ``n_theta`` angles in (-pi, pi]."""
        r = np.linspace(margin, math.pi / 2 - margin, n_r)
        th = -math.pi + 2 * math.pi * np.arange(1, n_theta + 1) / n_theta
        return cls(r, th)

    def sample(self, f: Field) -> "RadialGrid":
        R, T = np.meshgrid(self.r_nodes, self.theta_nodes, indexing="ij")
        return RadialGrid(self.r_nodes, self.theta_nodes, np.asarray(f(R, T), dtype=float))

    def points(self):
        R, T = np.meshgrid(self.r_nodes, self.theta_nodes, indexing="ij")
        return R.ravel(), T.ravel()


def radial_drift(n, r):
    """First-order coefficient ``(2n-1) cot r - tan r``."""
    r = np.asarray(r, dtype=float)
    return (2 * n - 1) / np.tan(r) - np.tan(r)


def _steps(r, theta, h):
    if h is None:
        return default_step(float(np.max(np.abs(r)))), default_step(float(np.max(np.abs(theta))))
    if np.ndim(h) == 0:
        return float(h), float(h)
    return float(h[0]), float(h[1])


def _guard(r, hr):
    r = np.asarray(r, dtype=float)
    # the Richardson stencil reaches 4h
    if np.any(r - 4 * hr <= 0) or np.any(r + 4 * hr >= math.pi / 2):
        raise DomainError(f"finite-difference stencil with h={hr:g} leaves (0, pi/2) around r={r}")


def _partials(f, r, theta, hr, ht):
    """``(f_r, f_rr, f_thth)`` with steps ``hr`` and ``ht`` in one batched call."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    o = _OFFSETS.reshape((-1,) + (1,) * r.ndim)
    rs = np.concatenate([r + o * hr, np.broadcast_to(r, (5,) + r.shape)])
    ts = np.concatenate([np.broadcast_to(theta, (5,) + r.shape), theta + o * ht])
    vals = np.asarray(f(rs, ts), dtype=float)
    vr, vt = vals[:5], vals[5:]
    f_r = np.tensordot(_D1, vr, axes=1) / (12 * hr)
    f_rr = np.tensordot(_D2, vr, axes=1) / (12 * hr ** 2)
    f_tt = np.tensordot(_D2, vt, axes=1) / (12 * ht ** 2)
    return f_r, f_rr, f_tt


def _apply(f, n, r, theta, h, fibre_coef):
    hr, ht = _steps(r, theta, h)
    _guard(r, hr)
    r_arr = np.asarray(r, dtype=float)
    drift = radial_drift(n, r_arr)
    fib = fibre_coef(r_arr)
    out = []
    for s in (1, 2):
        f_r, f_rr, f_tt = _partials(f, r, theta, s * hr, s * ht)
        out.append(f_rr + drift * f_r + fib * f_tt)
    value, coarse = out
    err = np.abs(value - coarse) / 15.0
    if np.ndim(value) == 0:
        return FDValue(float(value), float(err))
    return FDValue(value, err)


def apply_L_tilde(f: Field, n: int, r, theta, h=None) -> FDValue:
    """``L~ f`` at ``(r, theta)`` by fourth-order central differences.

    ``h`` is a common step or a pair ``(h_r, h_theta)``; by default
    ``max(1e-3, eps^(1/6))`` scaled by the coordinate.

    Raises
    ------
    DomainError
        If the stencil (including the ``2h`` Richardson stencil) leaves
        ``0 < r < pi/2``.
    """
    return _apply(f, n, r, theta, h, lambda r: np.tan(r) ** 2)


def apply_delta_r(f: Field, n: int, r, theta, h=None) -> FDValue:
    """Radial Laplace-Beltrami operator, ``L~`` with ``1/cos^2 r`` on ``d_thth``."""
    return _apply(f, n, r, theta, h, lambda r: 1.0 / np.cos(r) ** 2)


def mu_density(n, r):
    """``dmu_r / (dr dtheta) = 2 pi^n / Gamma(n) sin^{2n-1} r cos r``."""
    r = np.asarray(r, dtype=float)
    return 2 * math.pi ** n / math.gamma(n) * np.sin(r) ** (2 * n - 1) * np.cos(r)


def sphere_volume(n):
    """``mu(S^{2n+1}) = 2 pi^{n+1} / n!``."""
    return 2 * math.pi ** (n + 1) / math.gamma(n + 1)


def _theta_average(f, r, abs_tol, rel_tol, n0=32, n_max=1 << 14):
    """Periodic trapezoid rule for ``int_{-pi}^{pi} f(r, th) dth`` at every ``r``.

    Doubling reuses previous nodes; stops when two levels agree to tolerance.
    """
    r = np.asarray(r, dtype=float)
    N = n0
    th = -math.pi + 2 * math.pi * np.arange(N) / N
    sums = np.asarray(f(r[:, None], th[None, :]), dtype=float).sum(axis=1)
    est = 2 * math.pi / N * sums
    while N < n_max:
        mid = th + math.pi / N
        sums = sums + np.asarray(f(r[:, None], mid[None, :]), dtype=float).sum(axis=1)
        th = np.sort(np.concatenate([th, mid]))
        N *= 2
        new = 2 * math.pi / N * sums
        gap = np.max(np.abs(new - est)) if r.size else 0.0
        est = new
        if gap <= max(abs_tol, rel_tol * np.max(np.abs(est), initial=0.0)):
            return est
    raise ConvergenceError(f"theta quadrature not converged with {N} nodes", achieved=float(gap))


def mu_integral(f: Field, n: int, quad: Optional[QuadratureSpec] = None):
    """``int f dmu_r`` over ``[0, pi/2) x (-pi, pi]``.

    Adaptive Gauss-Kronrod in ``r`` around a periodic trapezoid rule in
    ``theta``, which converges geometrically for smooth periodic fields.
    Returns a :class:`~crsphere.numerics.QuadratureResult`.
    """
    quad = quad or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10)
    inner_tol = 0.01 * quad.abs_tol / math.pi

    def radial(rs):
        return mu_density(n, rs) * _theta_average(f, rs, inner_tol, 0.01 * quad.rel_tol)

    return integrate(radial, 0.0, math.pi / 2, quad, initial=4)


def _kernel_field(n, t, trunc=None):
    from .subriemannian import p_spectral_array

    def f(r, theta):
        return p_spectral_array(n, r, theta, t, trunc)[0]
    return f


def heat_residual(n: int, t: float, coord, steps=None) -> float:
    """``|d_t p - L~ p|`` for the spectral kernel at ``coord``.

    ``steps`` is ``None`` or ``(h_r, h_theta, h_t)``; ``d_t`` uses the same
    fourth-order stencil in time.
    """
    from .riemannian import Truncation
    from .subriemannian import p_spectral_array

    if not t > 0:
        raise DomainError("t must be positive")
    if steps is None:
        h_space, h_t = None, default_step(t) * min(1.0, t)
    else:
        h_space, h_t = (steps[0], steps[1]), steps[2]
    if t - 2 * h_t <= 0:
        raise DomainError("time stencil crosses t = 0")
    trunc = Truncation(max_terms=20000, abs_tol=1e-16)
    ts = t + _OFFSETS * h_t
    # evaluating at the smallest time bounds every truncation plan
    vals = np.array([p_spectral_array(n, coord.r, coord.theta, s, trunc)[0] for s in ts])
    dt = float(_D1 @ vals) / (12 * h_t)
    lap = apply_L_tilde(_kernel_field(n, t, trunc), n, coord.r, coord.theta, h_space).value
    return abs(dt - lap)


def green_residual(n: int, coord, steps=None) -> float:
    """``|(-L~ + n^2) G|`` for the closed-form conformal Green function.

    ``coord`` must keep sub-Riemannian distance at least 0.2 from the pole.
    """
    from .geodesy import distance
    from .green import green_conformal_array

    if distance(coord) < 0.2:
        raise DomainError("green_residual needs distance >= 0.2 from the pole")

    def G(r, theta):
        return green_conformal_array(n, r, theta)

    lap = apply_L_tilde(G, n, coord.r, coord.theta, steps).value
    return abs(-lap + n * n * float(G(coord.r, coord.theta)))
