"""Closed-form analyses of the solvability bounds, the alpha sweep through the
solver, and deterministic CSV/SVG output."""

from __future__ import annotations

import configparser
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .certifier import CertifierConstants, check_necessary_condition, gamma_alpha
from .field import BallQuery, Field, GridSpec, gaussian_bump, mu_eps
from .mild_solver import NoBlowUpError, SolverConfig, estimate_Talpha
from .propagators import AlphaParams
from .special_functions import DomainError

__all__ = [
    "GAnalysis",
    "PlotError",
    "SweepRow",
    "SweepSpec",
    "Theorem2Min",
    "curve_report",
    "emit_plot",
    "f_value",
    "g_analysis",
    "g_value",
    "galpha_bound",
    "parse_sweep_spec",
    "sweep_alpha",
    "sweep_csv",
    "theorem2_min",
    "theorem3_bound",
]


class PlotError(ValueError):
    pass


def _check_alpha_open(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _check_eps(eps: float, N: int) -> None:
    if not 0 < eps < N / 2:
        raise DomainError(f"eps must lie in (0, {N / 2}), got {eps}")


# {{{ f and the shrinking bound


def f_value(x, alpha: float, N: int):
    """``f(x) = x^((1-alpha)N/2) (log x)^(-N/2)`` for ``x > 1``."""
    x = np.asarray(x, dtype=float)
    y = np.log(x)
    return np.exp((1.0 - alpha) * N / 2 * y - N / 2 * np.log(y))


class Theorem2Min(NamedTuple):
    argmin: float
    minval: float


def theorem2_min(alpha: float, N: int) -> Theorem2Min:
    """Minimize ``f`` on ``(1, inf)`` by golden section in ``y = log x``.

    ``log f = (1-alpha)N/2 y - N/2 log y`` is convex in ``y``, so the search
    is unimodal. The golden-section point is then refined by a root search on
    ``d log f / dy``. The result is checked against ``e^(1/(1-alpha))`` and
    ``e^(N/2) (1-alpha)^(N/2)``.
    """
    _check_alpha_open(alpha)
    if 1.0 / (1.0 - alpha) > 700.0:
        raise DomainError(f"argmin e^(1/(1-alpha)) overflows a double at alpha={alpha}")
    c = (1.0 - alpha) * N / 2

    def obj(y: float) -> float:
        return c * y - N / 2 * math.log(y)

    # bracket from the sign change of the derivative, found by doubling
    lo, hi = 1e-3, 1.0
    while c - N / (2 * hi) < 0:
        hi *= 2.0
    res = minimize_scalar(obj, bracket=(lo, hi), method="golden",
                          options={"xtol": 1e-12})
    # function values only pin y to ~sqrt(eps) relative; polish on the derivative
    y0 = float(res.x)
    y = brentq(lambda v: c - N / (2 * v), 0.5 * y0, 2.0 * y0, xtol=1e-15, rtol=1e-15)
    out = Theorem2Min(math.exp(y), math.exp(obj(y)))
    want_x, want_f = math.exp(1.0 / (1.0 - alpha)), math.exp(N / 2) * (1.0 - alpha) ** (N / 2)
    if abs(out.argmin / want_x - 1) > 1e-6 or abs(out.minval / want_f - 1) > 1e-10:
        raise ArithmeticError(f"golden section missed the minimum: {out} vs ({want_x}, {want_f})")
    return out


def galpha_bound(alpha: float, N: int, gamma: float = 1.0) -> float:
    """``gamma e^(N/2) (1-alpha)^(N/2)``, the minimum of ``gamma f``."""
    _check_alpha_open(alpha)
    return gamma * math.exp(N / 2) * (1.0 - alpha) ** (N / 2)


# }}}


# {{{ existence-time bound and g


def theorem3_bound(alpha: float, eps: float, N: int) -> float:
    """``exp(-2 eps (2 - alpha) / (N alpha (1 - alpha)))``."""
    _check_alpha_open(alpha)
    _check_eps(eps, N)
    return math.exp(-2.0 * eps * (2.0 - alpha) / (N * alpha * (1.0 - alpha)))


def g_value(x, alpha: float, eps: float, N: int):
    """``g(x) = x^eps exp(-(1-alpha) N x / 2)``."""
    x = np.asarray(x, dtype=float)
    return x**eps * np.exp(-(1.0 - alpha) * N * x / 2)


class GAnalysis(NamedTuple):
    argmax: float
    maxval: float


def g_analysis(alpha: float, eps: float, N: int) -> GAnalysis:
    """Analytic maximizer ``2 eps / (N (1-alpha))`` of ``g``, cross-checked numerically.

    Also checks that ``g`` increases with ``alpha`` at a few fixed ``x``.
    """
    _check_alpha_open(alpha)
    _check_eps(eps, N)
    xm = 2.0 * eps / (N * (1.0 - alpha))
    out = GAnalysis(xm, xm**eps * math.exp(-eps))

    # log g in s = log x is concave; search a wide bracket
    def neg(s: float) -> float:
        return -(eps * s - (1.0 - alpha) * N * math.exp(s) / 2)

    res = minimize_scalar(neg, bounds=(-30.0, 30.0), method="bounded",
                          options={"xatol": 1e-12})
    if abs(math.exp(res.x) / xm - 1) > 1e-6:
        raise ArithmeticError(f"numerical argmax {math.exp(res.x)} disagrees with {xm}")
    xs = np.array([0.5, 1.0, 2.0, 5.0]) * xm
    a2 = alpha + 0.5 * (1.0 - alpha)
    if np.any(g_value(xs, a2, eps, N) <= g_value(xs, alpha, eps, N)):
        raise ArithmeticError("g is not increasing in alpha")
    return out


# }}}


# {{{ sweep


@dataclass(frozen=True)
class SweepSpec:
    alphas: tuple[float, ...]
    datum: str = "mu-eps"
    dim: int = 1
    eps: float = 0.25
    mass: float = 1.0
    width: float = 0.5
    grid: GridSpec = field(default_factory=lambda: GridSpec(1, 8.0, 256))
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(dt=1e-6, t_end=2e-6))
    t_max: float = 1e-2
    bisect_tol: float = 1e-7
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.alphas:
            raise ValueError("alphas must not be empty")
        if list(self.alphas) != sorted(self.alphas):
            raise ValueError("alphas must be sorted ascending")
        for a in self.alphas:
            _check_alpha_open(a)
        if self.datum not in ("mu-eps", "gaussian"):
            raise ValueError(f"unknown datum {self.datum!r}")
        if self.grid.dim != self.dim:
            raise ValueError("grid dimension does not match dim")
        if self.datum == "mu-eps":
            _check_eps(self.eps, self.dim)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def initial_datum(self) -> Field:
        if self.datum == "mu-eps":
            return mu_eps(self.grid, self.eps)
        return gaussian_bump(self.grid, self.mass, self.width)


def _getfloats(text: str) -> tuple[float, ...]:
    return tuple(float(s) for s in text.replace(",", " ").split())


def parse_sweep_spec(text: str) -> SweepSpec:
    """Read a sweep spec.

    Grammar: sections in brackets, ``key = value`` lines, ``#`` comments::

        [sweep]
        alphas = 0.5, 0.7, 0.9
        dim = 1
        t_max = 1e-2
        bisect_tol = 1e-7
        workers = 3
        [datum]
        kind = mu-eps        # or gaussian (keys mass, width)
        eps = 0.25
        [grid]
        half_width = 8
        n = 256
        [solver]
        dt = 1e-6
        blowup_sup_threshold = 1e8
        lag_rule = v-midpoint
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.read_string(text)
    if not cp.has_section("sweep") or "alphas" not in cp["sweep"]:
        raise ValueError("spec needs [sweep] with an alphas entry")
    sw = cp["sweep"]
    dim = sw.getint("dim", 1)
    d = cp["datum"] if cp.has_section("datum") else {}
    g = cp["grid"] if cp.has_section("grid") else {}
    s = cp["solver"] if cp.has_section("solver") else {}
    grid = GridSpec(dim, float(g.get("half_width", 8.0)), int(g.get("n", 256)))
    dt = float(s.get("dt", 1e-6))
    solver = SolverConfig(dt=dt, t_end=2 * dt,
                          blowup_sup_threshold=float(s.get("blowup_sup_threshold", 1e8)),
                          lag_rule=s.get("lag_rule", "v-midpoint"))
    return SweepSpec(
        alphas=_getfloats(sw["alphas"]),
        datum=d.get("kind", "mu-eps"),
        dim=dim,
        eps=float(d.get("eps", 0.25)),
        mass=float(d.get("mass", 1.0)),
        width=float(d.get("width", 0.5)),
        grid=grid,
        solver=solver,
        t_max=sw.getfloat("t_max", 1e-2),
        bisect_tol=sw.getfloat("bisect_tol", 1e-7),
        workers=sw.getint("workers", 1),
    )


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    t_star: float          # nan when no blow-up was detected
    status: str
    theorem3_bound: float  # nan for the gaussian datum
    implied_gamma: float   # nan when no ball satisfies rho^(2/alpha) < t*
    gamma: float


def _lattice(grid: GridSpec, alpha: float, T: float) -> list[BallQuery]:
    # balls centred at the origin, radii from one cell up to a quarter of the box
    rmax = min(0.5 * grid.half_width, math.exp(-1.0) * 0.999)
    radii = np.geomspace(grid.h, rmax, 24)
    return [BallQuery((0.0,) * grid.dim, float(r)) for r in radii
            if (2.0 / alpha) * math.log(r) < math.log(T)]


def _sweep_one(spec: SweepSpec, u0: Field, alpha: float) -> SweepRow:
    params = AlphaParams(alpha, spec.dim)
    gam = gamma_alpha(params)
    t3 = theorem3_bound(alpha, spec.eps, spec.dim) if spec.datum == "mu-eps" else math.nan
    try:
        ts = estimate_Talpha(params, u0, spec.solver, spec.t_max, spec.bisect_tol)
    except NoBlowUpError:
        return SweepRow(alpha, math.nan, "no_blowup", t3, math.nan, gam)
    lat = _lattice(spec.grid, alpha, ts)
    ig = check_necessary_condition(u0, params, ts, lat).max_implied_gamma if lat else math.nan
    return SweepRow(alpha, ts, "blew_up", t3, ig, gam)


def sweep_alpha(spec: SweepSpec) -> list[SweepRow]:
    """Estimate ``t*(alpha)`` for every alpha; rows come back in alpha order."""
    u0 = spec.initial_datum()
    if spec.workers == 1:
        return [_sweep_one(spec, u0, a) for a in spec.alphas]
    with ThreadPoolExecutor(max_workers=spec.workers) as ex:
        futs = [ex.submit(_sweep_one, spec, u0, a) for a in spec.alphas]
        return [f.result() for f in futs]


def nonincreasing(rows: list[SweepRow]) -> bool:
    """True when the finite ``t*`` values never increase along the sweep."""
    ts = [r.t_star for r in rows if math.isfinite(r.t_star)]
    return all(b <= a for a, b in zip(ts, ts[1:]))


def _fmt(x: float) -> str:
    return repr(float(x))


def sweep_csv(spec: SweepSpec, rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    c = CertifierConstants()
    buf.write(f"# datum={spec.datum} dim={spec.dim} eps={_fmt(spec.eps)} "
              f"grid_n={spec.grid.n} half_width={_fmt(spec.grid.half_width)} "
              f"dt={_fmt(spec.solver.dt)} t_max={_fmt(spec.t_max)} bisect_tol={_fmt(spec.bisect_tol)}\n")
    buf.write(f"# constants: C1=C2=(16 pi)^(-N/2) C3=derived C4={_fmt(c.C4)} r={_fmt(c.r)}\n")
    buf.write(f"# t_star nonincreasing in alpha: {str(nonincreasing(rows)).lower()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "t_star", "status", "theorem3_bound", "implied_gamma", "gamma"])
    for r in rows:
        w.writerow([_fmt(r.alpha), _fmt(r.t_star), r.status, _fmt(r.theorem3_bound),
                    _fmt(r.implied_gamma), _fmt(r.gamma)])
    return buf.getvalue()


# }}}


# {{{ curves


def curve_report(kind: str, N: int, alpha: float | None = None, eps: float = 0.25,
                 gamma: float = 1.0, points: int = 60) -> str:
    """CSV for the non-sweep plots. The first column is the abscissa.

    ``bound-curve``: alpha against the shrinking bound and the existence-time bound.
    ``f-curve``: x against f at the given alpha. ``g-curve``: x against g.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if kind == "bound-curve":
        buf.write(f"# gamma={_fmt(gamma)} eps={_fmt(eps)} N={N}\n")
        w.writerow(["alpha", "galpha_bound", "theorem3_bound"])
        for a in np.linspace(0.5, 0.99, points):
            w.writerow([_fmt(a), _fmt(galpha_bound(a, N, gamma)), _fmt(theorem3_bound(a, eps, N))])
    elif kind == "f-curve":
        if alpha is None:
            raise ValueError("f-curve needs alpha")
        xm = math.exp(1.0 / (1.0 - alpha))
        buf.write(f"# alpha={_fmt(alpha)} N={N} argmin={_fmt(xm)}\n")
        w.writerow(["x", "f"])
        for x in np.geomspace(1.05, xm * 50.0, points):
            w.writerow([_fmt(x), _fmt(f_value(x, alpha, N))])
    elif kind == "g-curve":
        if alpha is None:
            raise ValueError("g-curve needs alpha")
        xm = 2.0 * eps / (N * (1.0 - alpha))
        buf.write(f"# alpha={_fmt(alpha)} eps={_fmt(eps)} N={N} argmax={_fmt(xm)}\n")
        w.writerow(["x", "g"])
        for x in np.linspace(0.0, 6.0 * xm, points):
            w.writerow([_fmt(x), _fmt(g_value(x, alpha, eps, N))])
    else:
        raise ValueError(f"unknown curve kind {kind!r}")
    return buf.getvalue()


# }}}


# {{{ svg

PLOT_KINDS = ("talpha-curve", "bound-curve", "f-curve", "g-curve")
_W, _H = 640, 400
_ML, _MR, _MT, _MB = 70, 20, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _read_report(text: str) -> tuple[list[str], np.ndarray]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if len(lines) < 2:
        raise PlotError("report has no data rows")
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    data = []
    for r in body:
        if len(r) != len(header):
            raise PlotError(f"row {r} does not match header {header}")
        vals = []
        for s in r:
            try:
                vals.append(float(s))
            except ValueError:
                vals.append(math.nan)  # text columns such as status
        data.append(vals)
    return header, np.array(data, dtype=float)


class _Axis:
    def __init__(self, values: np.ndarray, lo_px: float, hi_px: float) -> None:
        v = values[np.isfinite(values)]
        pos = v[v > 0]
        self.log = v.size > 0 and pos.size == v.size and pos.max() / pos.min() > 1e3
        t = np.log10(v) if self.log else v
        a, b = (float(t.min()), float(t.max())) if t.size else (0.0, 1.0)
        if a == b:
            a, b = a - 0.5, b + 0.5
        pad = 0.05 * (b - a)
        self.a, self.b = a - pad, b + pad
        self.lo_px, self.hi_px = lo_px, hi_px

    def __call__(self, v: float) -> float:
        t = math.log10(v) if self.log else v
        return self.lo_px + (t - self.a) / (self.b - self.a) * (self.hi_px - self.lo_px)

    def ticks(self) -> list[tuple[float, str]]:
        out = []
        for t in np.linspace(self.a, self.b, 5):
            val = 10.0**t if self.log else t
            out.append((float(t), f"{val:.3g}"))
        return out

    def pos(self, t: float) -> float:
        return self.lo_px + (t - self.a) / (self.b - self.a) * (self.hi_px - self.lo_px)


def emit_plot(report: str, kind: str) -> str:
    """Render a report as a deterministic SVG string.

    ``talpha-curve`` expects the sweep CSV and draws ``t_star`` together
    with ``theorem3_bound``; the other kinds plot every column after the first
    against the first. Single points are drawn as markers only.
    """
    if kind not in PLOT_KINDS:
        raise PlotError(f"unknown plot kind {kind!r}")
    header, data = _read_report(report)
    if kind == "talpha-curve":
        need = ("alpha", "t_star", "theorem3_bound")
        if any(c not in header for c in need):
            raise PlotError(f"talpha-curve needs columns {need}")
        xcol, ycols = header.index("alpha"), [header.index("t_star"), header.index("theorem3_bound")]
    else:
        if len(header) < 2:
            raise PlotError("need at least two columns")
        xcol, ycols = 0, list(range(1, len(header)))
    x = data[:, xcol]
    ys = [data[:, c] for c in ycols]
    ax = _Axis(x, _ML, _W - _MR)
    ay = _Axis(np.concatenate(ys), _H - _MB, _MT)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="11">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W / 2:.1f}" y="18" text-anchor="middle">{kind}</text>',
           f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
           'fill="none" stroke="black"/>']
    for t, lab in ax.ticks():
        px = ax.pos(t)
        out.append(f'<line x1="{px:.2f}" y1="{_H - _MB}" x2="{px:.2f}" y2="{_H - _MB + 4}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{_H - _MB + 16}" text-anchor="middle">{lab}</text>')
    for t, lab in ay.ticks():
        py = ay.pos(t)
        out.append(f'<line x1="{_ML - 4}" y1="{py:.2f}" x2="{_ML}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 6}" y="{py + 4:.2f}" text-anchor="end">{lab}</text>')
    xl = header[xcol] + (" (log)" if ax.log else "")
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle">{xl}</text>')
    if ay.log:
        out.append(f'<text x="14" y="{_H / 2:.1f}" transform="rotate(-90 14 {_H / 2:.1f})" '
                   'text-anchor="middle">log scale</text>')
    for i, (c, y) in enumerate(zip(ycols, ys)):
        color = _COLORS[i % len(_COLORS)]
        ok = np.isfinite(x) & np.isfinite(y) & ((y > 0) if ay.log else True)
        pts = [(ax(float(a)), ay(float(b))) for a, b in zip(x[ok], y[ok])]
        if len(pts) > 1:
            path = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        if len(pts) <= 20:
            for px, py in pts:
                out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{_W - _MR - 6}" y="{_MT + 14 * (i + 1)}" text-anchor="end" '
                   f'fill="{color}">{header[c]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# }}}
