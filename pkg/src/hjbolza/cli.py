"""Command line front end: ``hjbolza <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import load_problem
from .conjugate import ConjugateQuery, conjugate_table_1d, hamiltonian
from .errors import AccuracyError, ConfigError, DimensionError, DomainError, ResolutionError
from .limits import LimitSchedule
from .nonsmooth import (
    lower_contingent_derivative,
    lplus,
    subdifferential_test,
    superdifferential_test,
    upper_contingent_derivative,
)
from .problems import catalog_entry, catalog_names
from .reports import reports_to_json
from .trajectory import MinimizationOptions, minimize_bolza
from .value_grid import GridSpec, solve_semilagrangian
from .verifier import SuiteConfig, run_suite


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _box(text: str) -> list[tuple[float, float]]:
    """``lo:hi[,lo:hi...]``."""
    out = []
    for part in text.split(","):
        lo, hi = part.split(":")
        out.append((float(lo), float(hi)))
    return out


def _p_grid(text: str) -> np.ndarray:
    lo, hi, n = text.split(":")
    return np.linspace(float(lo), float(hi), int(n))


def _fmt(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v + 0.0) if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def _grid_spec(args, dimension: int) -> GridSpec:
    box = _box(args.box)
    if len(box) == 1 and dimension > 1:
        box = box * dimension
    nx = [int(v) for v in str(args.nx).split(",")]
    if len(nx) == 1:
        nx = nx * len(box)
    return GridSpec(args.t_max, args.nt, tuple(box), tuple(nx))


def _add_grid_flags(p: argparse.ArgumentParser, nt: int, nx: int) -> None:
    p.add_argument("--t-max", type=float, default=1.0, help="time horizon")
    p.add_argument("--nt", type=int, default=nt, help="number of time steps")
    p.add_argument("--box", default="-2:2", help="space box lo:hi[,lo:hi]")
    p.add_argument("--nx", default=str(nx), help="nodes per axis (comma list or one value)")


# ---------------------------------------------------------------------------


def cmd_conjugate(args) -> int:
    problem = load_problem(args.problem, args.dimension)
    x = _floats(args.x)
    out = csv.writer(sys.stdout, lineterminator="\n")
    if args.p_grid:
        if problem.dimension != 1:
            raise DimensionError("--p-grid needs a one-dimensional problem")
        grid = _p_grid(args.p_grid)
        values, arg = conjugate_table_1d(problem, x, grid, args.tol, return_argmax=True)
        out.writerow(["p", "H", "argmax"])
        for p, h, u in zip(grid, values, arg):
            out.writerow([_fmt(p), _fmt(h), _fmt(u)])
        return 0
    p = _floats(args.p)
    res = hamiltonian(problem, ConjugateQuery(x, p, args.tol))
    n = problem.dimension
    if n == 1:
        out.writerow(["p", "H", "argmax"])
        out.writerow([_fmt(p[0]), _fmt(res.value), _fmt(res.argmax[0])])
    else:
        out.writerow([f"p{i + 1}" for i in range(n)] + ["H"] + [f"argmax{i + 1}" for i in range(n)])
        out.writerow([_fmt(v) for v in p] + [_fmt(res.value)] + [_fmt(v) for v in res.argmax])
    return 0


def cmd_solve_arc(args) -> int:
    problem = load_problem(args.problem, args.dimension)
    opts = MinimizationOptions(knot_count=args.knots, restarts=args.restarts, seed=args.seed)
    value, traj = minimize_bolza(problem, args.t, _floats(args.x), opts)
    out = csv.writer(sys.stdout, lineterminator="\n")
    n = problem.dimension
    out.writerow(["s"] + (["y"] if n == 1 else [f"y{i + 1}" for i in range(n)]))
    for s, y in zip(traj.knot_times, traj.knot_states):
        out.writerow([_fmt(s)] + [_fmt(v) for v in y])
    summary = f"# value={_fmt(value)} running_cost={_fmt(traj.running_cost)} knots={args.knots}"
    if traj.notes:
        summary += f" notes={traj.notes}"
    print(summary)
    return 0


def cmd_solve_grid(args) -> int:
    problem = load_problem(args.problem, args.dimension)
    spec = _grid_spec(args, problem.dimension)
    grid = solve_semilagrangian(problem, spec)
    n = spec.dimension
    header = ["t"] + (["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]) + ["V"]
    nodes = spec.nodes().reshape(-1, n)
    handle = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        out = csv.writer(handle, lineterminator="\n")
        out.writerow(header)
        for k, t in enumerate(spec.times):
            for node, v in zip(nodes, grid.values[k].ravel()):
                out.writerow([_fmt(t)] + [_fmt(c) for c in node] + [_fmt(v)])
    finally:
        if args.out:
            handle.close()
    sidecar = args.sidecar or (args.out + ".json" if args.out else None)
    if sidecar:
        meta = {"problem": problem.name, "grid": spec.to_dict(), "constants": grid.constants}
        Path(sidecar).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if args.emit_plot:
        _write_gnuplot(args.emit_plot, spec, grid)
    return 0


def _write_gnuplot(path: str, spec: GridSpec, grid) -> None:
    """1-d: one ``x V`` block per time slice; 2-d: ``x y V`` blocks for ``splot`` per slice."""
    lines = []
    axes = spec.axes()
    for k, t in enumerate(spec.times):
        lines.append(f"# t = {_fmt(t)}")
        if spec.dimension == 1:
            for xv, v in zip(axes[0], grid.values[k]):
                lines.append(f"{_fmt(xv)} {_fmt(v)}")
        else:
            for i, xv in enumerate(axes[0]):
                for j, yv in enumerate(axes[1]):
                    lines.append(f"{_fmt(xv)} {_fmt(yv)} {_fmt(grid.values[k][i, j])}")
                lines.append("")
        lines += ["", ""]
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def _function_of(args, problem):
    if args.function == "closed-form":
        entry = catalog_entry(args.problem, args.dimension) if args.problem in catalog_names() else None
        if entry is None or entry.known_value_function is None:
            raise ConfigError("no closed-form value function for this problem; use --function grid")
        f = entry.known_value_function
        return lambda t, x: float(f(t, np.atleast_1d(x)))
    return solve_semilagrangian(problem, _grid_spec(args, problem.dimension))


def cmd_nonsmooth(args) -> int:
    problem = load_problem(args.problem, args.dimension)
    schedule = LimitSchedule.geometric(args.h0, args.ratio, args.terms,
                                       direction_samples=args.samples, cone_width=args.cone)
    point = _floats(args.point)
    if args.direction is None and args.mode in ("dlow", "dup", "lplus"):
        raise ConfigError(f"--direction is required for mode {args.mode}")
    direction = _floats(args.direction) if args.direction is not None else None
    payload: dict = {"problem": problem.name, "mode": args.mode, "point": point}
    if direction is not None:
        payload["direction"] = direction
    if args.mode == "lplus":
        est = lplus(problem, point, direction, schedule)
        payload.update(value=est.value, extrapolation_gap=est.extrapolation_gap,
                       per_h=[{"h": h, "value": v} for h, v in est.per_h_record])
        print(json.dumps(_clean(payload), indent=2, sort_keys=True))
        return 0
    f = _function_of(args, problem)
    pt = (point[0], point[1:])
    if args.mode in ("dlow", "dup"):
        fn = lower_contingent_derivative if args.mode == "dlow" else upper_contingent_derivative
        est = fn(f, pt, direction, schedule)
        payload.update(kind=est.kind.value, value=est.value, extrapolation_gap=est.extrapolation_gap,
                       per_h=[{"h": h, "quotient": q} for h, q in est.per_h_record])
    else:
        if not args.candidate:
            raise ConfigError("--candidate is required for subdiff/superdiff")
        fn = subdifferential_test if args.mode == "subdiff" else superdifferential_test
        rep = fn(f, pt, _floats(args.candidate), schedule, tolerance=args.tol)
        payload.update(report=rep.to_dict(), verdict="pass" if rep.passed else "fail")
        print(json.dumps(_clean(payload), indent=2, sort_keys=True))
        return 0 if rep.passed else 1
    print(json.dumps(_clean(payload), indent=2, sort_keys=True))
    return 0


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    return obj


def cmd_verify(args) -> int:
    problem = load_problem(args.problem, args.dimension)
    spec = _grid_spec(args, problem.dimension)
    config = SuiteConfig(suite=args.suite, seed=args.seed, n_points=args.points)
    reports = run_suite(problem, spec, config)
    text = reports_to_json(reports)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    for r in reports:
        print(r.summary())
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hjbolza", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--problem", required=True,
                       help=f"catalog name ({', '.join(catalog_names())}) or problem file")
        p.add_argument("--dimension", type=int, default=1, help="state dimension for catalog problems")

    p = sub.add_parser("conjugate", help="Hamiltonian H(x, p) as CSV p,H,argmax")
    common(p)
    p.add_argument("--x", default="0", help="state, comma separated")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", help="costate, comma separated")
    g.add_argument("--p-grid", help="uniform 1-d costate grid lo:hi:n")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("solve-arc", help="minimize the Bolza functional from (t, x)")
    common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--knots", type=int, default=17)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve_arc)

    p = sub.add_parser("solve-grid", help="semi-Lagrangian grid of V as CSV t,x...,V")
    common(p)
    _add_grid_flags(p, 64, 129)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--sidecar", help="JSON sidecar path (default <out>.json)")
    p.add_argument("--emit-plot", help="write gnuplot-ready columns to this path")
    p.set_defaults(func=cmd_solve_grid)

    p = sub.add_parser("nonsmooth", help="contingent derivatives, membership tests and L+")
    common(p)
    p.add_argument("--point", required=True, help="t,x... (lplus: the state x)")
    p.add_argument("--direction", help="dt,dx... for dlow/dup (lplus: the velocity u)")
    p.add_argument("--mode", required=True, choices=["dlow", "dup", "subdiff", "superdiff", "lplus"])
    p.add_argument("--candidate", help="p_t,p_x... for subdiff/superdiff")
    p.add_argument("--function", choices=["closed-form", "grid"], default="closed-form",
                   help="function whose derivatives are taken")
    p.add_argument("--h0", type=float, default=0.1)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--terms", type=int, default=12)
    p.add_argument("--samples", type=int, default=9, help="direction perturbations per step")
    p.add_argument("--cone", type=float, default=0.25, help="relative cone width at the first step")
    p.add_argument("--tol", type=float, default=1e-3)
    _add_grid_flags(p, 256, 1025)
    p.set_defaults(func=cmd_nonsmooth)

    p = sub.add_parser("verify", help="run the verification suite; exit 0 iff every report passes")
    common(p)
    p.add_argument("--suite", choices=["continuous", "discontinuous", "counterexample", "all"], default="all")
    _add_grid_flags(p, 256, 1025)
    p.add_argument("--points", type=int, default=50, help="number of sampled test points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DimensionError, DomainError, AccuracyError, ResolutionError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
