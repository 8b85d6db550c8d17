"""Batch command-line front end.

Subcommands evaluate the Kilbas-Saigo function and its Laplace transform,
solve the relaxation equations, tabulate pmfs, run Monte Carlo simulations
and comparisons, and invert the renewal-function transform.  Every run
writes exactly one artifact file (CSV with a '#'-prefixed metadata header,
or a JSON mirror); identical configurations produce byte-identical files.

Exit codes: 0 success, 2 parameter error, 3 numeric-convergence error,
4 statistical-check failure (``compare --assert-mode``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .kilbas_saigo import KSParams, ToleranceError, ks_eval
from .relaxation import (
    SecondOrderSpec,
    StretchedModel,
    series_residual,
    solve_first_order,
    solve_second_order,
)
from .rng import RngStream
from .specfun import PoleError, QuadratureError
from .stochastic import (
    DrawBudgetError,
    RegimeError,
    StepBudgetError,
    moments_laskin,
    pmf_hat,
    pmf_laskin,
    pmf_second_order,
    renewal_vs_laskin_discrepancy,
    simulate_laskin,
    simulate_renewal,
)
from .transforms import (
    ContourError,
    SectorError,
    invert_laplace,
    ks_laplace,
    ks_sector_halfangle,
    renewal_function_lt,
)

EXIT_OK = 0
EXIT_PARAM = 2
EXIT_NUMERIC = 3
EXIT_STATISTICAL = 4

_PARAM_ERRORS = (ValueError, RegimeError, ContourError, SectorError, PoleError)
_NUMERIC_ERRORS = (
    ArithmeticError,
    ToleranceError,
    QuadratureError,
    StepBudgetError,
    DrawBudgetError,
)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_atomic(path: str, text: str) -> None:
    """Write via a temp file + rename so partial outputs never appear."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".stretchrenew-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, fmt, metadata, columns, rows) -> None:
    """Emit the artifact: CSV with '#' metadata header, or JSON mirror."""
    rows = [[_fmt(v) for v in row] for row in rows]
    if fmt == "csv":
        lines = [f"# {k} = {v}" for k, v in metadata.items()]
        lines.append(",".join(columns))
        lines.extend(",".join(r) for r in rows)
        _write_atomic(path, "\n".join(lines) + "\n")
    elif fmt == "json":
        doc = {"metadata": metadata, "columns": list(columns), "rows": rows}
        _write_atomic(path, json.dumps(doc, indent=1) + "\n")
    else:
        raise ValueError("format must be csv or json")


def read_table(path):
    """Parse a file written by write_table back into (metadata, columns, rows).

    Values come back as floats (ints when exactly integral); metadata values
    stay strings.
    """
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        meta, columns = doc["metadata"], doc["columns"]
        raw = doc["rows"]
    else:
        meta = {}
        columns = None
        raw = []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                k, _, v = line[1:].partition("=")
                meta[k.strip()] = v.strip()
            elif columns is None:
                columns = line.split(",")
            else:
                raw.append(line.split(","))
    def _val(v):
        try:
            return float(v)
        except ValueError:
            return v

    rows = [[_val(v) for v in r] for r in raw]
    return meta, columns, rows


def _out_path(args, default_name: str) -> str:
    if args.out:
        return args.out
    base = os.environ.get("STRETCHRENEW_OUTDIR", ".")
    return os.path.join(base, default_name + "." + args.format)


def _meta(args, **extra) -> dict:
    md = {"tool": "stretchrenew", "version": __version__,
          "command": args.command}
    md.update(extra)
    return md


def _grid(args) -> np.ndarray:
    if args.grid_count < 1:
        raise ValueError("grid count must be >= 1")
    if args.grid_count == 1:
        return np.array([args.grid_min])
    return np.linspace(args.grid_min, args.grid_max, args.grid_count)


def _ks_params(args) -> KSParams:
    if args.alpha is not None:
        if args.gamma is None:
            raise ValueError("--gamma required with --alpha")
        return KSParams.stretched(args.alpha, args.gamma)
    if args.a is None or args.m is None or args.l is None:
        raise ValueError("give either --alpha/--gamma or --a/--m/--l")
    return KSParams(args.a, args.m, args.l)


def _model(args) -> StretchedModel:
    return StretchedModel(args.alpha, args.gamma, args.lam)


# --------------------------------------------------------------------------
# subcommand handlers


def _cmd_ks_eval(args):
    params = _ks_params(args)
    zs = _grid(args)
    rows = [[z, float(ks_eval(params, z, tol=args.tol))] for z in zs]
    meta = _meta(args, a=_fmt(params.a), m=_fmt(params.m), l=_fmt(params.l),
                 tol=_fmt(args.tol))
    write_table(_out_path(args, "ks_eval"), args.format, meta,
                ["z", "ks_value"], rows)
    return EXIT_OK


def _cmd_ks_laplace(args):
    params = _ks_params(args)
    rows = []
    for eta in _grid(args):
        val = ks_laplace(params, args.nu, args.lam, eta)
        rows.append([eta, float(np.real(val))])
    meta = _meta(args, a=_fmt(params.a), m=_fmt(params.m), l=_fmt(params.l),
                 nu=_fmt(args.nu), lam=_fmt(args.lam))
    write_table(_out_path(args, "ks_laplace"), args.format, meta,
                ["eta", "laplace_value"], rows)
    return EXIT_OK


def _cmd_solve(args):
    model = StretchedModel(args.alpha, args.gamma,
                           args.lam if args.lam is not None else 1.0)
    ts = _grid(args)
    if args.kind == "first":
        if args.kappa is None:
            raise ValueError("--kappa required for first-order")
        sol = solve_first_order(model, args.kappa, f0=args.f0)
        eq = {"kind": "first-order", "kappa": args.kappa}
        extra = {"kappa": _fmt(args.kappa)}
    else:
        if args.a is None or args.b is None:
            raise ValueError("--a and --b required for second-order")
        spec = SecondOrderSpec(args.alpha, args.gamma, args.a, args.b,
                               args.f0, args.df0)
        sol = solve_second_order(spec)
        eq = {"kind": "second-order", "a": args.a, "b": args.b}
        extra = {"a": _fmt(args.a), "b": _fmt(args.b), "df0": _fmt(args.df0)}
    rows = []
    for t in ts:
        res = series_residual(sol, eq, np.array([t])) if t > 0 else 0.0
        rows.append([t, sol(t), res])
    meta = _meta(args, alpha=_fmt(args.alpha), gamma=_fmt(args.gamma),
                 kind=args.kind, f0=_fmt(args.f0), **extra)
    write_table(_out_path(args, "solve"), args.format, meta,
                ["t", "f", "residual"], rows)
    return EXIT_OK


def _cmd_pmf(args):
    if args.family == "laskin":
        table = pmf_laskin(_model(args), args.t, args.nmax)
        extra = {}
    elif args.family == "second-order":
        table = pmf_second_order(_model(args), args.t, args.nmax)
        extra = {}
    else:
        if args.a is None or args.b is None:
            raise ValueError("--a and --b required for hat family")
        table = pmf_hat(args.alpha, args.gamma, args.a, args.b, args.lam,
                        args.t, args.nmax)
        extra = {"a": _fmt(args.a), "b": _fmt(args.b)}
    rows = [[n, p] for n, p in enumerate(table.probs)]
    meta = _meta(args, family=args.family, alpha=_fmt(args.alpha),
                 gamma=_fmt(args.gamma), lam=_fmt(args.lam), t=_fmt(args.t),
                 truncation_mass=_fmt(table.truncation_mass), **extra)
    write_table(_out_path(args, "pmf"), args.format, meta,
                ["n", "prob"], rows)
    return EXIT_OK


def _cmd_simulate(args):
    model = _model(args)
    rng = RngStream(args.seed, args.stream)
    if args.process == "renewal":
        traj = simulate_renewal(model, args.horizon, rng)
        rows = [[i + 1, t] for i, t in enumerate(traj.arrivals)]
        cols = ["n", "arrival_time"]
        extra = {"horizon": _fmt(args.horizon)}
    else:
        rows = [[i, simulate_laskin(model, args.t, rng.child(i))]
                for i in range(args.draws)]
        cols = ["draw", "count"]
        extra = {"t": _fmt(args.t), "draws": str(args.draws)}
    meta = _meta(args, process=args.process, alpha=_fmt(args.alpha),
                 gamma=_fmt(args.gamma), lam=_fmt(args.lam),
                 seed=str(args.seed), stream=str(args.stream), **extra)
    write_table(_out_path(args, "simulate"), args.format, meta, cols, rows)
    return EXIT_OK


def _cmd_moments(args):
    model = _model(args)
    an = moments_laskin(model, args.t, "analytic")
    mc = moments_laskin(model, args.t, "monte-carlo", draws=args.draws,
                        rng=RngStream(args.seed, args.stream))
    rows = [
        ["mean", an.mean, mc.mean, mc.mc_std_error],
        ["variance", an.variance, mc.variance,
         mc.variance * np.sqrt(2.0 / max(args.draws - 1, 1))],
    ]
    meta = _meta(args, alpha=_fmt(args.alpha), gamma=_fmt(args.gamma),
                 lam=_fmt(args.lam), t=_fmt(args.t), draws=str(args.draws),
                 seed=str(args.seed), stream=str(args.stream),
                 product_constant=_fmt(an.product_constant))
    write_table(_out_path(args, "moments"), args.format, meta,
                ["quantity", "analytic", "monte_carlo", "std_error"], rows)
    return EXIT_OK


def _cmd_compare(args):
    model = _model(args)
    d = renewal_vs_laskin_discrepancy(model, args.t, args.draws,
                                      RngStream(args.seed, args.stream))
    rows = [["max_abs_pmf_gap", d, args.threshold]]
    meta = _meta(args, alpha=_fmt(args.alpha), gamma=_fmt(args.gamma),
                 lam=_fmt(args.lam), t=_fmt(args.t), draws=str(args.draws),
                 seed=str(args.seed), stream=str(args.stream),
                 assert_mode=str(bool(args.assert_mode)))
    write_table(_out_path(args, "compare"), args.format, meta,
                ["quantity", "value", "threshold"], rows)
    if args.assert_mode and d >= args.threshold:
        print(f"statistical check failed: discrepancy {d} >= "
              f"{args.threshold}", file=sys.stderr)
        return EXIT_STATISTICAL
    return EXIT_OK


def _cmd_renewal_fn(args):
    model = _model(args)
    sector = min(ks_sector_halfangle(model.alpha, model.rho), np.pi)
    rows = []
    for t in _grid(args):
        val = invert_laplace(lambda z: renewal_function_lt(model, z), t,
                             sector=sector)
        rows.append([t, val])
    meta = _meta(args, alpha=_fmt(args.alpha), gamma=_fmt(args.gamma),
                 lam=_fmt(args.lam))
    write_table(_out_path(args, "renewal_fn"), args.format, meta,
                ["t", "expected_count"], rows)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _add_common(p):
    p.add_argument("--out", help="output file path")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _add_model(p):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=1.0)


def _add_grid(p, name="grid"):
    p.add_argument(f"--{name}-min", dest="grid_min", type=float,
                   required=True)
    p.add_argument(f"--{name}-max", dest="grid_max", type=float, default=0.0)
    p.add_argument(f"--{name}-count", dest="grid_count", type=int, default=1)


def _add_seed(p):
    p.add_argument("--seed", type=int, required=True,
                   help="mandatory for stochastic commands")
    p.add_argument("--stream", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stretchrenew",
        description="stretched-relaxation renewal toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ks-eval", help="Kilbas-Saigo values on a grid")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--tol", type=float, default=1e-10)
    _add_grid(p, "z")
    _add_common(p)
    p.set_defaults(func=_cmd_ks_eval)

    p = sub.add_parser("ks-laplace", help="Laplace transform values")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--lam", "--lambda", dest="lam", type=float, default=1.0)
    _add_grid(p, "eta")
    _add_common(p)
    p.set_defaults(func=_cmd_ks_laplace)

    p = sub.add_parser("solve", help="relaxation solutions with residuals")
    p.add_argument("kind", choices=["first", "second"])
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lam", "--lambda", dest="lam", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--df0", type=float, default=0.0)
    _add_grid(p, "t")
    _add_common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("pmf", help="pmf tables")
    p.add_argument("family", choices=["laskin", "second-order", "hat"])
    _add_model(p)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--nmax", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_pmf)

    p = sub.add_parser("simulate", help="Monte Carlo simulation")
    p.add_argument("process", choices=["renewal", "laskin"])
    _add_model(p)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=1)
    _add_seed(p)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("moments", help="analytic vs Monte Carlo moments")
    _add_model(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--draws", type=int, required=True)
    _add_seed(p)
    _add_common(p)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("compare",
                       help="renewal vs time-changed pmf discrepancy")
    _add_model(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--assert-mode", action="store_true")
    p.add_argument("--threshold", type=float, default=0.01)
    _add_seed(p)
    _add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("renewal-fn",
                       help="Laplace-inverted renewal function")
    _add_model(p)
    _add_grid(p, "t")
    _add_common(p)
    p.set_defaults(func=_cmd_renewal_fn)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse uses its own exit code for bad flags; map to ours
        return EXIT_PARAM if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _NUMERIC_ERRORS as exc:
        print(json.dumps({"error": "numeric", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERIC
    except _PARAM_ERRORS as exc:
        print(json.dumps({"error": "parameter", "detail": str(exc)}),
              file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
