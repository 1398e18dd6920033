"""Command-line front end: ``crsphere {kernel,riemannian,green,distance,asym,verify}``.

Every table is written as CSV (``# key: value`` metadata lines, then a
header row) or as JSON ``{"meta": {...}, "rows": [...]}``. Floats carry 17
significant digits. Exit codes: 0 success, 1 verification failure,
2 domain or configuration error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConvergenceError, DomainError
from .geodesy import asym_coefficients, small_time_kernel, solve_phi
from .green import LaplaceQuery, green_conformal, laplace_lhs, laplace_rhs
from .numerics import QuadratureSpec
from .riemannian import Truncation, q_small_time, q_spectral, q_theta
from .subriemannian import T_MIN_INTEGRAL, CylCoord, p_integral, p_spectral

EXIT_OK, EXIT_VERIFY, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 1, 2, 3

METHODS = ("spectral", "integral", "both", "asymptotic")


@dataclass
class RunConfig:
    n: int = 1
    t: list = field(default_factory=lambda: [0.5])
    r_grid: str = "0.6"
    theta_grid: str = "1.0"
    delta_grid: str = "1.0"
    lam: list = field(default_factory=list)
    method: str = "spectral"
    abs_tol: Optional[float] = None
    rel_tol: Optional[float] = None
    format: str = "csv"
    out: Optional[str] = None
    quick: bool = False
    tol_scale: float = 1.0
    only: list = field(default_factory=list)

    def validate(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if self.method not in METHODS + ("theta",):
            raise DomainError(f"unknown method {self.method!r}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"unknown format {self.format!r}")
        if any(not t > 0 for t in self.t):
            raise DomainError("every t must be positive")
        if self.method in ("integral", "both") and any(t < T_MIN_INTEGRAL for t in self.t):
            raise DomainError(f"method {self.method} needs t >= {T_MIN_INTEGRAL}")
        return self


def parse_grid(spec: str) -> np.ndarray:
    """``"a:b:steps"`` (inclusive, ``steps`` points), a single number, or a comma list."""
    spec = str(spec).strip()
    if spec == "":
        return np.array([])
    try:
        if ":" in spec:
            a, b, steps = spec.split(":")
            steps = int(steps)
            if steps < 0:
                raise ValueError
            return np.linspace(float(a), float(b), steps)
        return np.array([float(x) for x in spec.split(",")])
    except ValueError:
        raise DomainError(f"bad grid {spec!r}; expected a:b:steps") from None


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.17g}") if math.isfinite(x) else str(float(x))
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


def _meta(cfg: RunConfig, command, **extra):
    meta = {
        "command": command,
        "version": __version__,
        "n": cfg.n,
        "t": cfg.t,
        "method": cfg.method,
        "abs_tol": cfg.abs_tol,
        "rel_tol": cfg.rel_tol,
        "truncation": "certified geometric tail bound below abs_tol",
    }
    meta.update(extra)
    return meta


def write_table(meta, columns, rows, fmt, out):
    rows = [{c: _fmt(row.get(c, "")) for c in columns} for row in rows]
    if fmt == "json":
        text = json.dumps({"meta": meta, "rows": rows}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        for k, v in meta.items():
            buf.write(f"# {k}: {json.dumps(v)}\n")
        w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _Rows:
    """Collects rows and the worst error class seen."""

    def __init__(self):
        self.rows = []
        self.status = EXIT_OK

    def run(self, base, fn):
        row = dict(base)
        try:
            row.update(fn())
            row["error"] = ""
        except ConvergenceError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            self.status = max(self.status, EXIT_CONVERGENCE)
        except DomainError as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            if self.status != EXIT_CONVERGENCE:
                self.status = EXIT_DOMAIN
        self.rows.append(row)


def _trunc(cfg):
    return Truncation(abs_tol=cfg.abs_tol) if cfg.abs_tol else None


def _quad(cfg, default_abs, default_rel):
    return QuadratureSpec(abs_tol=cfg.abs_tol or default_abs, rel_tol=cfg.rel_tol or default_rel)


def cmd_kernel(cfg: RunConfig):
    cols = ["r", "theta", "t", "value", "method", "error_estimate", "discrepancy", "error"]
    acc = _Rows()
    rs, ths = parse_grid(cfg.r_grid), parse_grid(cfg.theta_grid)
    coeffs = None
    for t in cfg.t:
        for r in rs:
            for th in ths:
                def one(r=float(r), th=float(th), t=t):
                    nonlocal coeffs
                    c = CylCoord(cfg.n, r, th)
                    if cfg.method == "spectral":
                        kv = p_spectral(c, t, _trunc(cfg))
                        return {"value": kv.value, "method": kv.method, "error_estimate": kv.error_estimate}
                    if cfg.method == "integral":
                        kv = p_integral(c, t, _quad(cfg, 1e-14, 1e-11))
                        return {"value": kv.value, "method": kv.method, "error_estimate": kv.error_estimate}
                    if cfg.method == "both":
                        a = p_spectral(c, t, _trunc(cfg))
                        b = p_integral(c, t, _quad(cfg, 1e-14, 1e-11))
                        return {"value": a.value, "method": "spectral+integral",
                                "error_estimate": max(a.error_estimate, b.error_estimate),
                                "discrepancy": abs(a.value - b.value) / abs(a.value)}
                    if r < 1e-8 and abs(th) < 1e-8 and coeffs is None:
                        coeffs = asym_coefficients(cfg.n)
                    av = small_time_kernel(c, t, coeffs)
                    return {"value": av.value, "method": f"asymptotic:{av.regime}"}
                acc.run({"r": float(r), "theta": float(th), "t": t}, one)
    write_table(_meta(cfg, "kernel"), cols, acc.rows, cfg.format, cfg.out)
    return acc.status


def cmd_riemannian(cfg: RunConfig):
    cols = ["delta", "t", "value", "method", "error_estimate", "discrepancy", "error"]
    acc = _Rows()
    for t in cfg.t:
        for d in parse_grid(cfg.delta_grid):
            def one(d=float(d), t=t):
                if cfg.method == "spectral":
                    v, tr = q_spectral(cfg.n, t, math.cos(d), _trunc(cfg))
                    return {"value": float(v), "method": "spectral", "error_estimate": tr.tail_bound}
                if cfg.method in ("theta", "integral"):
                    return {"value": q_theta(cfg.n, t, d), "method": "theta"}
                if cfg.method == "both":
                    v, tr = q_spectral(cfg.n, t, math.cos(d), _trunc(cfg))
                    w = q_theta(cfg.n, t, d)
                    return {"value": float(v), "method": "spectral+theta", "error_estimate": tr.tail_bound,
                            "discrepancy": abs(float(v) - w) / abs(w)}
                return {"value": float(q_small_time(cfg.n, t, d)), "method": "asymptotic"}
            acc.run({"delta": float(d), "t": t}, one)
    write_table(_meta(cfg, "riemannian"), cols, acc.rows, cfg.format, cfg.out)
    return acc.status


def cmd_green(cfg: RunConfig):
    cols = ["r", "theta", "green", "lambda", "laplace_lhs", "laplace_rhs", "discrepancy", "error"]
    acc = _Rows()
    rs, ths = parse_grid(cfg.r_grid), parse_grid(cfg.theta_grid)
    for r in rs:
        for th in ths:
            c_args = (cfg.n, float(r), float(th))
            if not cfg.lam:
                acc.run({"r": float(r), "theta": float(th)},
                        lambda: {"green": green_conformal(CylCoord(*c_args))})
            for lam in cfg.lam:
                def one(lam=lam):
                    c = CylCoord(*c_args)
                    q = LaplaceQuery(c, lam)
                    rhs = laplace_rhs(q, _quad(cfg, 1e-13, 1e-12))
                    row = {"laplace_rhs": float(np.real(rhs))}
                    if c.r or c.theta:
                        row["green"] = green_conformal(c)
                    if lam > 0:
                        lhs = laplace_lhs(q, _quad(cfg, 1e-10, 1e-10))
                        row["laplace_lhs"] = float(np.real(lhs))
                        row["discrepancy"] = abs(lhs - rhs) / abs(rhs)
                    return row
                acc.run({"r": float(r), "theta": float(th), "lambda": float(lam)}, one)
    write_table(_meta(cfg, "green"), cols, acc.rows, cfg.format, cfg.out)
    return acc.status


def cmd_distance(cfg: RunConfig):
    cols = ["r", "theta", "d", "phi", "u", "regime", "error"]
    acc = _Rows()
    for r in parse_grid(cfg.r_grid):
        for th in parse_grid(cfg.theta_grid):
            def one(r=float(r), th=float(th)):
                g = solve_phi(CylCoord(cfg.n, r, th))
                return {"d": g.dist, "phi": g.phi, "u": g.u, "regime": g.regime}
            acc.run({"r": float(r), "theta": float(th)}, one)
    write_table(_meta(cfg, "distance"), cols, acc.rows, cfg.format, cfg.out)
    return acc.status


def cmd_asym(cfg: RunConfig):
    cols = ["r", "theta", "t", "regime", "exponent", "prefactor", "value", "error"]
    acc = _Rows()
    coeffs = asym_coefficients(cfg.n)
    for t in cfg.t:
        for r in parse_grid(cfg.r_grid):
            for th in parse_grid(cfg.theta_grid):
                def one(r=float(r), th=float(th), t=t):
                    av = small_time_kernel(CylCoord(cfg.n, r, th), t, coeffs)
                    return {"regime": av.regime, "exponent": av.exponent,
                            "prefactor": av.prefactor, "value": av.value}
                acc.run({"r": float(r), "theta": float(th), "t": t}, one)
    meta = _meta(cfg, "asym", A_n=coeffs.A_n, B_n=coeffs.B_n)
    write_table(meta, cols, acc.rows, cfg.format, cfg.out)
    return acc.status


def cmd_verify(cfg: RunConfig):
    from .verify import all_passed, run_all

    cols = ["criterion", "name", "anchor", "measured", "tolerance", "passed", "seconds"]

    def progress(chk):
        flag = "PASS" if chk.passed else "FAIL"
        print(f"[{flag}] {chk.criterion}: {chk.name} = {chk.measured:.3g} (tol {chk.tolerance:.3g})",
              file=sys.stderr, flush=True)

    checks = run_all(quick=cfg.quick, scale=cfg.tol_scale, only=set(cfg.only) or None, progress=progress)
    meta = _meta(cfg, "verify", quick=cfg.quick, tol_scale=cfg.tol_scale)
    write_table(meta, cols, [c.as_dict() for c in checks], cfg.format, cfg.out)
    return EXIT_OK if all_passed(checks) else EXIT_VERIFY


COMMANDS = {
    "kernel": cmd_kernel,
    "riemannian": cmd_riemannian,
    "green": cmd_green,
    "distance": cmd_distance,
    "asym": cmd_asym,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="crsphere", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--n", type=int)
    common.add_argument("--t", type=float, action="append", help="time; repeat for several")
    common.add_argument("--r-grid", dest="r_grid", help="a:b:steps, a number or a comma list")
    common.add_argument("--theta-grid", dest="theta_grid")
    common.add_argument("--delta-grid", dest="delta_grid")
    common.add_argument("--lam", type=float, action="append", help="Laplace parameter (green)")
    common.add_argument("--method", choices=METHODS + ("theta",))
    common.add_argument("--abs-tol", dest="abs_tol", type=float)
    common.add_argument("--rel-tol", dest="rel_tol", type=float)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out")
    common.add_argument("--quick", action="store_true", default=None)
    common.add_argument("--tol-scale", dest="tol_scale", type=float,
                        help="multiply every verification tolerance")
    common.add_argument("--only", type=int, action="append", help="verify only this criterion")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read config {args.config}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        if "t" in data and not isinstance(data["t"], list):
            data["t"] = [data["t"]]
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            data[f.name] = val
    return RunConfig(**data).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DomainError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
