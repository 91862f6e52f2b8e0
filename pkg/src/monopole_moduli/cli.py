"""Command-line front end: ``monopole-moduli {eval,audit,curve,metric,flow}``.

Exit codes: 0 success, 1 audit or flow failure, 2 usage error, 3 numeric
infeasibility (insufficient truncation order, non-convergence, signature
obstruction).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import audits, flow, modforms, monopole
from .config import ConfigError, resolve
from .modforms import DegenerateCurveError, Tau
from .series import TruncationError, format_terms

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

EVAL_TARGETS = ("E2", "E4", "E6", "theta2", "theta3", "theta4", "g2", "g3", "j", "I")

METRIC_COLUMNS = ("rho", "q", "Omega1", "Omega2", "Omega3", "a2", "b2", "c2", "abc2",
                  "selfdual1", "selfdual2", "selfdual3", "b2_over_c2")


class UsageError(Exception):
    pass


class NumericError(Exception):
    pass


def fmt(v, precision: int) -> str:
    """Locale-free number formatting; exact rationals stay exact."""
    if v is None:
        return ""
    if isinstance(v, bool) or isinstance(v, str):
        return str(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    v = complex(v)
    re = format(v.real, f".{precision}g")
    if v.imag == 0:
        return re
    im = format(abs(v.imag), f".{precision}g")
    sign = "-" if v.imag < 0 else "+"
    return f"{re}{sign}{im}j"


def _json_value(v, precision):
    if v is None or isinstance(v, (bool, str, int)):
        return v
    if isinstance(v, Fraction):
        return fmt(v, precision) if v.denominator != 1 else v.numerator
    v = complex(v)
    r = float(format(v.real, f".{precision}g"))
    if v.imag == 0:
        return r
    return [r, float(format(v.imag, f".{precision}g"))]


def emit(rows: list[dict], cfg, out) -> None:
    """CSV with header, or a JSON array of objects."""
    if cfg.format == "json":
        data = [{k: _json_value(v, cfg.precision) for k, v in row.items()} for row in rows]
        out.write(json.dumps(data, indent=2) + "\n")
        return
    buf = io.StringIO()
    columns = list(rows[0].keys()) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c), cfg.precision) for c in columns])
    out.write(buf.getvalue())


# eval ------------------------------------------------------------------------


def _series_for(target, order):
    if target in ("E2", "E4", "E6"):
        return modforms.eisenstein_q({"E2": 1, "E4": 2, "E6": 3}[target], order)
    if target.startswith("theta"):
        return modforms.theta_q(int(target[-1]), order)
    e4, e6 = modforms.eisenstein_q(2, order), modforms.eisenstein_q(3, order)
    if target == "j":
        return e4**3 / modforms.discriminant_q(order)
    if target == "I":
        return e6 * e6 / e4**3
    raise UsageError(f"{target} carries transcendental factors; use --tau, or E4/E6 for series")


def cmd_eval(args, cfg, out):
    if args.series:
        out.write(format_terms(_series_for(args.target, cfg.order)) + "\n")
        return EXIT_OK
    if args.tau is None:
        raise UsageError("give --tau RHO (tau = i*RHO) or --series")
    tau = Tau(complex(args.tau_re, args.tau))
    tol = cfg.tol
    row = {"target": args.target, "tau": tau.value}
    t = args.target
    if t in ("E2", "E4", "E6"):
        row["value"] = modforms.eisenstein({"E2": 1, "E4": 2, "E6": 3}[t], tau, cfg.order, tol)
    elif t.startswith("theta"):
        row["value"] = modforms.theta(int(t[-1]), tau, cfg.order, tol)
    elif t in ("g2", "g3"):
        w = modforms.g_invariants_tau(tau, cfg.order, tol)
        row["value"] = w.g2 if t == "g2" else w.g3
    else:
        j, I = modforms.j_and_I(tau, cfg.order, tol)
        if t == "j":
            row["value"] = j
            row["deviation_from_1728"] = j - 1728
        else:
            row["value"] = I
            row["deviation_from_1"] = -modforms.one_minus_I(tau, cfg.order, tol)
    emit([row], cfg, out)
    return EXIT_OK


# audit -----------------------------------------------------------------------


def cmd_audit(args, cfg, out):
    rep = audits.run(args.target, n=args.n, seed=cfg.seed, tol=cfg.tol, order=cfg.order)
    data = rep.to_dict()
    data["audit"] = args.target
    if args.explain:
        data["explanation"] = audits.EXPLAIN[args.target]
    out.write(json.dumps(data, indent=2, default=str) + "\n")
    return EXIT_OK if rep.passed else EXIT_FAIL


# curve -----------------------------------------------------------------------


def _parse_number(text: str):
    try:
        return Fraction(text)
    except ValueError:
        raise UsageError(f"not a real number: {text!r}") from None


def cmd_curve(args, cfg, out):
    if args.rho is not None:
        if args.r1 is not None or args.r2 is not None:
            raise UsageError("give either --r1/--r2 or --rho, not both")
        if args.rho < 1:
            raise UsageError("--rho must be at least 1")
        c = monopole.r_params_from_tau(Tau.imag(args.rho), cfg.order)
        rho = args.rho
    else:
        if args.r1 is None or args.r2 is None:
            raise UsageError("give both --r1 and --r2, or --rho")
        r1, r2 = _parse_number(args.r1), _parse_number(args.r2)
        if r1 < 0:
            raise UsageError("r1 must be non-negative")
        if r1 == 0:
            raise UsageError("degenerate: two k=1 curves η = ±i√r2 ζ "
                             f"(r1 = 0, slopes ±{fmt(math.sqrt(abs(r2)), cfg.precision)}i)")
        c = monopole.SpectralCurve2(r1, r2)
        rho = monopole.tau_from_r(c, order=cfg.order).rho if r2 > 0 else None
    w = monopole.weierstrass_from_r(c)
    emit([{"r1": c.r1, "r2": c.r2, "g2": w.g2, "g3": w.g3, "disc": w.discriminant,
           "I": monopole.I_from_r(c), "rho": rho}], cfg, out)
    return EXIT_OK


# metric ----------------------------------------------------------------------


def metric_rows(rho_min, rho_max, steps, orientation="-", order=modforms.DEFAULT_ORDER):
    grid = [rho_min] if steps == 1 else list(np.linspace(rho_min, rho_max, steps))
    rows = []
    for rho in grid:
        rho = float(rho)
        try:
            p = monopole.omega_from_theta(rho, order)
        except ValueError as exc:
            # near rho = 0 two Omega_i agree to working precision
            raise NumericError(f"rho={rho}: {exc}") from exc
        fr = monopole.metric_from_omega(p, orientation)
        if not fr.positive:
            raise NumericError(f"signature obstruction at rho={rho}: "
                               f"(a2, b2, c2) = ({fr.a2}, {fr.b2}, {fr.c2})")
        sd = fr.selfdual_residuals
        rows.append(dict(zip(METRIC_COLUMNS, (
            rho, math.exp(-2 * math.pi * rho), *p, fr.a2, fr.b2, fr.c2, fr.abc2,
            *sd, fr.b2 / fr.c2))))
    return rows


def cmd_metric(args, cfg, out):
    if not args.rho_min < args.rho_max:
        raise UsageError("--rho-min must be below --rho-max")
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.rho_min <= 0:
        raise UsageError("--rho-min must be positive")
    emit(metric_rows(args.rho_min, args.rho_max, args.steps, args.orientation, cfg.order),
         cfg, out)
    return EXIT_OK


# flow ------------------------------------------------------------------------


def cmd_flow(args, cfg, out):
    tol = args.tol if args.tol is not None else cfg.tol
    name = args.field
    if args.start is not None:
        try:
            start = [complex(x.replace(" ", "")) for x in args.start.split(",")]
        except ValueError:
            raise UsageError(f"bad --start {args.start!r}") from None
        if len(start) != 3:
            raise UsageError("--start needs three comma-separated values")
        if name == "omega":
            if any(z.imag for z in start):
                raise UsageError("omega states are real")
            start = [z.real for z in start]
        p0 = args.p0 if args.p0 is not None else 0.0
        res = flow.integrate(name, start, p0, args.to, tol)
    else:
        if args.p0 is None:
            raise UsageError("give --from (or --from-tau) for an oracle start, or --start")
        res = flow.integrate_oracle(name, args.p0, args.to, tol, cfg.order)
    data = res.to_dict()
    data["tol"] = tol
    ok = res.ok and (res.endpoint_error is None or res.endpoint_error < 10 * tol)
    data["passed"] = ok
    if args.trajectory:
        rows = [{"param": s, **{f"y{i + 1}": v for i, v in enumerate(y)}} for s, y in res.samples]
        emit(rows, cfg, out)
    else:
        if cfg.format == "json":
            out.write(json.dumps(data, indent=2) + "\n")
        else:
            emit([{k: (json.dumps(v) if isinstance(v, list) else v) for k, v in data.items()}],
                 cfg, out)
    if not res.ok:
        print(f"flow stopped: {res.message}; last good sample at {res.endpoint[0]!r}",
              file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help="key = value file (order, tol, seed, format, precision)")
    g.add_argument("--order", help="series truncation order (rational, default 30)")
    g.add_argument("--seed", type=int)
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--precision", type=int, help="significant digits (default 17)")

    p = argparse.ArgumentParser(prog="monopole-moduli", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="modular forms at a point or as q-series")
    e.add_argument("target", choices=EVAL_TARGETS)
    e.add_argument("--tau", type=float, help="imaginary part of tau")
    e.add_argument("--tau-re", type=float, default=0.0, help="real part of tau")
    e.add_argument("--series", action="store_true", help="print exponent:coefficient pairs")
    e.add_argument("--tol", type=float)
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("audit", parents=[common], help="seeded consistency audits (JSON)")
    a.add_argument("target", choices=audits.AUDITS)
    a.add_argument("--n", type=int, default=100, help="number of sample points")
    a.add_argument("--tol", type=float)
    a.add_argument("--explain", action="store_true")
    a.set_defaults(func=cmd_audit)

    c = sub.add_parser("curve", parents=[common], help="k=2 spectral curve <-> tau")
    c.add_argument("--r1")
    c.add_argument("--r2")
    c.add_argument("--rho", type=float)
    c.add_argument("--tol", type=float)
    c.set_defaults(func=cmd_curve)

    m = sub.add_parser("metric", parents=[common], help="tabulate the Bianchi IX metric")
    m.add_argument("--rho-min", type=float, required=True)
    m.add_argument("--rho-max", type=float, required=True)
    m.add_argument("--steps", type=int, default=10)
    m.add_argument("--orientation", choices=("+", "-"), default="-")
    m.add_argument("--tol", type=float)
    m.set_defaults(func=cmd_metric)

    f = sub.add_parser("flow", parents=[common], help="integrate R, H or omega flows")
    f.add_argument("field", choices=flow.FIELDS)
    f.add_argument("--from", "--from-tau", dest="p0", type=float,
                   help="start parameter (s with tau = i s, or rho)")
    f.add_argument("--to", type=float, required=True)
    f.add_argument("--start", help="explicit start state a,b,c (complex allowed)")
    f.add_argument("--tol", type=float)
    f.add_argument("--trajectory", action="store_true", help="print all samples")
    f.set_defaults(func=cmd_flow)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args.config, {"order": args.order, "tol": args.tol, "seed": args.seed,
                                    "format": args.format, "precision": args.precision})
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TruncationError, DegenerateCurveError, monopole.ConvergenceError,
            monopole.SignatureError, NumericError, ZeroDivisionError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
