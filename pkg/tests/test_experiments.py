import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracfujita.experiments import (
    PlotError,
    SweepSpec,
    curve_report,
    emit_plot,
    f_value,
    g_analysis,
    g_value,
    galpha_bound,
    parse_sweep_spec,
    sweep_alpha,
    sweep_csv,
    theorem2_min,
    theorem3_bound,
)
from fracfujita.field import GridSpec
from fracfujita.mild_solver import SolverConfig
from fracfujita.special_functions import DomainError


def test_theorem2_examples():
    assert theorem2_min(0.9, 2).minval == pytest.approx(0.2718281828459045, rel=1e-12)
    assert theorem2_min(0.5, 1).argmin == pytest.approx(7.389056098930650, rel=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 0.7, 0.9, 0.99])
@pytest.mark.parametrize("N", [1, 2])
def test_theorem2_closed_forms(alpha, N):
    r = theorem2_min(alpha, N)
    assert r.argmin == pytest.approx(math.exp(1 / (1 - alpha)), rel=1e-6)
    assert r.minval == pytest.approx(math.exp(N / 2) * (1 - alpha) ** (N / 2), rel=1e-10)
    # f falls before the minimizer and rises after it
    x = np.geomspace(1.01, r.argmin, 200)
    assert np.all(np.diff(f_value(x, alpha, N)) < 0)
    x = np.geomspace(r.argmin, r.argmin * 1e3, 200)
    assert np.all(np.diff(f_value(x, alpha, N)) > 0)


def test_theorem2_overflow_guard():
    with pytest.raises(DomainError):
        theorem2_min(0.999, 1)


def test_galpha_bound():
    assert galpha_bound(0.9, 1) == pytest.approx(math.exp(0.5) * math.sqrt(0.1), rel=1e-14)
    # N = 2: halving (1 - alpha) halves the bound
    assert galpha_bound(0.98, 2) == pytest.approx(galpha_bound(0.96, 2) / 2, rel=1e-12)
    assert galpha_bound(1 - 1e-12, 1) < 1e-5
    assert galpha_bound(0.9, 1, gamma=3.0) == pytest.approx(3 * galpha_bound(0.9, 1))


def test_theorem3_bound_values():
    assert theorem3_bound(0.9, 0.25, 1) == pytest.approx(math.exp(-0.55 / 0.09), rel=1e-14)
    assert theorem3_bound(0.9, 0.25, 1) == pytest.approx(2.2181e-3, abs=1e-7)
    assert theorem3_bound(0.9, 0.4, 1) < theorem3_bound(0.9, 0.25, 1)
    assert theorem3_bound(0.999, 0.25, 1) < 1e-200
    with pytest.raises(DomainError):
        theorem3_bound(0.5, 0.6, 1)


def test_theorem3_monotonicity_turns_at_two_minus_sqrt2():
    # d/da of (2-a)/(a(1-a)) has numerator -a^2 + 4a - 2, which vanishes at 2 - sqrt(2)
    a0 = 2 - math.sqrt(2)
    for N, eps in [(1, 0.25), (2, 0.5)]:
        hi = [theorem3_bound(a, eps, N) for a in np.linspace(a0 + 1e-3, 0.99, 500)]
        lo = [theorem3_bound(a, eps, N) for a in np.linspace(0.05, a0 - 1e-3, 500)]
        assert np.all(np.diff(hi) < 0)
        assert np.all(np.diff(lo) > 0)


@pytest.mark.parametrize("alpha", [0.5, 0.7, 0.9, 0.99])
@pytest.mark.parametrize("N", [1, 2])
def test_g_analysis(alpha, N):
    eps = 0.25
    r = g_analysis(alpha, eps, N)
    assert r.argmax == pytest.approx(2 * eps / (N * (1 - alpha)), rel=1e-12)
    assert r.maxval == pytest.approx(r.argmax**eps * math.exp(-eps), rel=1e-12)
    assert g_value(0.0, alpha, eps, N) == 0.0


def test_g_analysis_example():
    assert g_analysis(0.9, 0.25, 1).argmax == pytest.approx(5.0)


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.01, 50.0))
def test_g_increasing_in_alpha_property(a, b, x):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        return
    assert g_value(x, hi, 0.25, 1) > g_value(x, lo, 0.25, 1)


# {{{ sweep


SPEC_TEXT = """
# a tiny sweep
[sweep]
alphas = 0.5, 0.7, 0.9
dim = 1
t_max = 1e-3
bisect_tol = 1e-6    # absolute
workers = 2
[datum]
kind = mu-eps
eps = 0.25
[grid]
half_width = 8
n = 128
[solver]
dt = 1e-6
"""


def test_parse_spec():
    s = parse_sweep_spec(SPEC_TEXT)
    assert s.alphas == (0.5, 0.7, 0.9) and s.workers == 2
    assert s.grid == GridSpec(1, 8.0, 128) and s.solver.dt == 1e-6
    with pytest.raises(ValueError):
        parse_sweep_spec("[sweep]\nalphas =\n")
    with pytest.raises(ValueError):
        parse_sweep_spec("[grid]\nn = 64\n")
    with pytest.raises(ValueError):
        parse_sweep_spec(SPEC_TEXT.replace("0.5, 0.7, 0.9", "0.9, 0.5"))


def test_sweep_rows_in_alpha_order_and_deterministic():
    s = parse_sweep_spec(SPEC_TEXT)
    rows = sweep_alpha(s)
    assert [r.alpha for r in rows] == [0.5, 0.7, 0.9]
    assert all(r.status == "blew_up" for r in rows)
    serial = sweep_alpha(parse_sweep_spec(SPEC_TEXT.replace("workers = 2", "workers = 1")))
    assert sweep_csv(s, rows) == sweep_csv(s, serial)
    text = sweep_csv(s, rows)
    assert "alpha,t_star,status,theorem3_bound,implied_gamma,gamma" in text.splitlines()


def test_sweep_small_gaussian_reports_no_blowup():
    s = SweepSpec(alphas=(0.5,), datum="gaussian", mass=0.05, width=0.5,
                  grid=GridSpec(1, 8.0, 256), solver=SolverConfig(dt=0.05, t_end=0.1),
                  t_max=1.0, bisect_tol=1e-2)
    (row,) = sweep_alpha(s)
    assert row.status == "no_blowup" and math.isnan(row.t_star)


# }}}


# {{{ plots


def test_plot_deterministic_and_kinds():
    rep = curve_report("bound-curve", 1)
    a, b = emit_plot(rep, "bound-curve"), emit_plot(rep, "bound-curve")
    assert a == b and a.startswith("<svg") and a.endswith("</svg>\n")
    assert "log scale" in a  # theorem3_bound spans many decades
    for kind in ("f-curve", "g-curve"):
        assert "<polyline" in emit_plot(curve_report(kind, 1, alpha=0.8), kind)


def test_plot_single_row_is_marker_only():
    rep = "alpha,t_star,status,theorem3_bound,implied_gamma,gamma\n0.5,1e-3,blew_up,0.05,1.0,1.0\n"
    svg = emit_plot(rep, "talpha-curve")
    assert "<polyline" not in svg and svg.count("<circle") == 2


def test_plot_errors():
    with pytest.raises(PlotError):
        emit_plot("x,y\n", "f-curve")
    with pytest.raises(PlotError):
        emit_plot("x,y\n1,2,3\n", "f-curve")
    with pytest.raises(PlotError):
        emit_plot("x,y\n1,2\n", "talpha-curve")
    with pytest.raises(PlotError):
        emit_plot("x,y\n1,2\n", "pie")


# }}}
