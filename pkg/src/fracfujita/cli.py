"""Command-line entry point (``fracfujita``)."""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import certifier, experiments, fieldio
from .field import BallQuery, GridSpec, ball_integral, gaussian_bump, mu_eps
from .mild_solver import NoBlowUpError, SolverConfig, estimate_Talpha, solve
from .propagators import AlphaParams, apply_alphaS, apply_P
from .special_functions import DensityQuery, h_alpha, h_laplace, h_moment, mittag_leffler


def _g17(x: float) -> str:
    return format(float(x), "#.17g")


def _emit(args, header: list[str], rows: list[list[float]]) -> None:
    """One value per line, or a CSV table with ``--csv``."""
    out = sys.stdout
    if getattr(args, "csv", False):
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_g17(v) for v in r])
    else:
        for r in rows:
            out.write(_g17(r[-1]) + "\n")


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="\n")


# {{{ handlers


def cmd_ml(a) -> None:
    xs = np.array(a.x, dtype=float)
    vals = np.atleast_1d(mittag_leffler(xs, a.alpha, a.beta))
    _emit(a, ["x", "value"], [[x, v] for x, v in zip(xs, vals)])


def cmd_halpha(a) -> None:
    _emit(a, ["theta", "value"], [[t, h_alpha(DensityQuery(a.alpha, t))] for t in a.theta])


def cmd_hmoment(a) -> None:
    _emit(a, ["nu", "value"], [[nu, h_moment(a.alpha, nu)] for nu in a.nu])


def cmd_hlaplace(a) -> None:
    _emit(a, ["z", "value"], [[z, h_laplace(a.alpha, z, weighted=a.weighted)] for z in a.z])


def cmd_make_data(a) -> None:
    g = GridSpec(a.dim, a.half_width, a.n)
    u = mu_eps(g, a.eps) if a.kind == "mu-eps" else gaussian_bump(g, a.mass, a.width)
    fieldio.write_field(a.out, u)


def cmd_ball_integral(a) -> None:
    u = fieldio.read_field(a.input)
    z = tuple(a.z) if a.z else (0.0,) * u.grid.dim
    _emit(a, ["rho", "value"], [[a.rho, ball_integral(u, BallQuery(z, a.rho))]])


def cmd_propagate(a) -> None:
    u = fieldio.read_field(a.input)
    params = AlphaParams(a.alpha, u.grid.dim)
    op = apply_P if a.op == "P" else apply_alphaS
    fieldio.write_field(a.out, op(params, a.t, u))


def _solver_cfg(a, t_end: float) -> SolverConfig:
    return SolverConfig(dt=a.dt, t_end=t_end, blowup_sup_threshold=a.threshold,
                        snapshot_stride=a.snapshot_stride, lag_rule=a.lag_rule)


def cmd_solve(a) -> None:
    u0 = fieldio.read_field(a.u0)
    rep = solve(AlphaParams(a.alpha, a.dim), u0, _solver_cfg(a, a.t_end))
    _write_text(a.report, rep.to_csv())
    if a.snapshots:
        d = Path(a.snapshots)
        d.mkdir(parents=True, exist_ok=True)
        for i, (_t, f) in enumerate(rep.snapshots):
            fieldio.write_field(d / f"snap_{i:05d}.bin", f)


def cmd_talpha(a) -> None:
    u0 = fieldio.read_field(a.u0)
    try:
        ts = estimate_Talpha(AlphaParams(a.alpha, a.dim), u0, _solver_cfg(a, 2 * a.dt),
                             a.t_max, a.tol)
    except NoBlowUpError as exc:
        print(f"no blow-up: {exc}", file=sys.stderr)
        sys.exit(3)
    _emit(a, ["alpha", "t_star"], [[a.alpha, ts]])


def _read_constants(path: str | None) -> certifier.CertifierConstants:
    if path is None:
        return certifier.CertifierConstants()
    text = Path(path).read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str  # keep C1..C4 as written
    if not text.lstrip().startswith("["):
        text = "[constants]\n" + text
    cp.read_string(text)
    sec = cp[cp.sections()[0]]
    kw = {k: float(v) for k, v in sec.items()}
    unknown = set(kw) - {"C1", "C2", "C3", "C4", "r"}
    if unknown:
        raise ValueError(f"unknown constants {sorted(unknown)}")
    return certifier.CertifierConstants(**kw)


def _read_lattice(path: str, dim: int) -> list[BallQuery]:
    """CSV with columns ``z0[,z1],rho`` and a header row."""
    rows = list(csv.reader(Path(path).read_text().splitlines()))
    out = []
    for r in rows[1:]:
        if not r or r[0].startswith("#"):
            continue
        vals = [float(s) for s in r]
        if len(vals) != dim + 1:
            raise ValueError(f"lattice row {r} needs {dim} centre coordinates and rho")
        out.append(BallQuery(tuple(vals[:dim]), vals[dim]))
    return out


def cmd_certify(a) -> None:
    u0 = fieldio.read_field(a.u0)
    params = AlphaParams(a.alpha, a.dim)
    consts = _read_constants(a.constants)
    rep = certifier.check_necessary_condition(u0, params, a.T, _read_lattice(a.lattice, a.dim), consts)
    buf = io.StringIO()
    c = rep.constants
    buf.write("# " + " ".join(f"{k}={_g17(c[k])}" for k in ("C1", "C2", "C3", "C4", "r", "r1", "r2"))
              + f" gamma={_g17(rep.gamma)}\n")
    buf.write("# B > 1 means the iteration lower bound diverges under these constants\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z", "rho", "M", "bound", "implied_gamma", "B"])
    for r in rep.rows:
        w.writerow([" ".join(_g17(v) for v in r["z"]), _g17(r["rho"]), _g17(r["M"]),
                    _g17(r["bound"]), _g17(r["implied_gamma"]), _g17(r["B"])])
    _write_text(a.out, buf.getvalue())


def cmd_thm2_min(a) -> None:
    r = experiments.theorem2_min(a.alpha, a.dim)
    _emit(a, ["argmin", "minval"], [[r.argmin, r.minval]] if a.csv else [[r.argmin], [r.minval]])


def cmd_galpha_bound(a) -> None:
    _emit(a, ["galpha_bound"], [[experiments.galpha_bound(a.alpha, a.dim, a.gamma)]])


def cmd_thm3_bound(a) -> None:
    _emit(a, ["theorem3_bound"], [[experiments.theorem3_bound(a.alpha, a.eps, a.dim)]])


def cmd_g_analysis(a) -> None:
    r = experiments.g_analysis(a.alpha, a.eps, a.dim)
    _emit(a, ["argmax", "maxval"], [[r.argmax, r.maxval]] if a.csv else [[r.argmax], [r.maxval]])


def cmd_sweep_alpha(a) -> None:
    spec = experiments.parse_sweep_spec(Path(a.spec).read_text())
    rows = experiments.sweep_alpha(spec)
    _write_text(a.out, experiments.sweep_csv(spec, rows))


def cmd_curve(a) -> None:
    _write_text(a.out, experiments.curve_report(a.kind, a.dim, a.alpha, a.eps, a.gamma, a.points))


def cmd_plot(a) -> None:
    _write_text(a.out, experiments.emit_plot(Path(a.report).read_text(), a.kind))


# }}}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracfujita", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add(name: str, fn, help: str, csv_flag: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.set_defaults(fn=fn)
        if csv_flag:
            p.add_argument("--csv", action="store_true", help="machine-readable CSV output")
        return p

    p = add("ml", cmd_ml, "Mittag-Leffler E_{alpha,beta}(x), x <= 0")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("x", type=float, nargs="+")

    p = add("halpha", cmd_halpha, "subordination density h_alpha(theta)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("theta", type=float, nargs="+")

    p = add("hmoment", cmd_hmoment, "quadrature of int theta^nu h_alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("nu", type=float, nargs="+")

    p = add("hlaplace", cmd_hlaplace, "quadrature of int h_alpha e^(z theta)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--weighted", action="store_true", help="use the weight alpha*theta")
    p.add_argument("z", type=float, nargs="+")

    p = add("make-data", cmd_make_data, "write an initial datum", csv_flag=False)
    p.add_argument("--kind", choices=("mu-eps", "gaussian"), required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--half-width", type=float, default=8.0)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--width", type=float, default=0.5)
    p.add_argument("--out", required=True, help=".csv for CSV, anything else for FHF1")

    p = add("ball-integral", cmd_ball_integral, "integral of a field over a ball")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--z", type=float, nargs="*")
    p.add_argument("--rho", type=float, required=True)

    p = add("propagate", cmd_propagate, "apply P_alpha(t) or alpha S_alpha(t)", csv_flag=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--op", choices=("P", "alphaS"), required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    def solver_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--dt", type=float, required=True)
        p.add_argument("--u0", required=True)
        p.add_argument("--threshold", type=float, default=1e8, help="blow-up sup threshold")
        p.add_argument("--snapshot-stride", type=int, default=10)
        p.add_argument("--lag-rule", choices=("v-midpoint", "left"), default="v-midpoint")

    p = add("solve", cmd_solve, "march the mild formulation", csv_flag=False)
    solver_args(p)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--report", default="-")
    p.add_argument("--snapshots", help="directory for FHF1 snapshots")

    p = add("talpha", cmd_talpha, "numerical blow-up time")
    solver_args(p)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--tol", type=float, required=True)

    p = add("certify", cmd_certify, "necessary-condition check over a ball lattice", csv_flag=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--u0", required=True)
    p.add_argument("--lattice", required=True, help="CSV z0[,z1],rho")
    p.add_argument("--constants", help="key = value file with C1..C4, r")
    p.add_argument("--out", default="-")

    p = add("thm2-min", cmd_thm2_min, "minimum of f on (1, inf)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)

    p = add("galpha-bound", cmd_galpha_bound, "shrinking bound gamma e^(N/2)(1-alpha)^(N/2)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0)

    p = add("thm3-bound", cmd_thm3_bound, "existence-time bound")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)

    p = add("g-analysis", cmd_g_analysis, "maximizer of g")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)

    p = add("sweep-alpha", cmd_sweep_alpha, "blow-up times over an alpha sweep", csv_flag=False)
    p.add_argument("--spec", required=True)
    p.add_argument("--out", default="-")

    p = add("curve", cmd_curve, "CSV for bound-, f- or g-curves", csv_flag=False)
    p.add_argument("--kind", choices=("bound-curve", "f-curve", "g-curve"), required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--out", default="-")

    p = add("plot", cmd_plot, "render a report as SVG", csv_flag=False)
    p.add_argument("--kind", choices=experiments.PLOT_KINDS, required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--out", default="-")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.fn(args)
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
