import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from fracfujita.special_functions import (
    ConvergenceError,
    DensityQuery,
    DomainError,
    MLQuery,
    OutOfWindowError,
    PoleError,
    gamma_fn,
    h_alpha,
    h_alpha_window,
    h_laplace,
    h_moment,
    mittag_leffler,
    psi_alpha,
    r1_r2,
)


def ml_mp(x, alpha, beta, dps=60):
    # direct power series at high precision; fine for moderate |x|
    with mp.workdps(dps):
        x, a, b = mp.mpf(x), mp.mpf(alpha), mp.mpf(beta)
        return float(mp.nsum(lambda k: x**k * mp.rgamma(a * k + b), [0, mp.inf]))


# {{{ gamma


def test_gamma_matches_mpmath():
    for x in [0.1, 0.5, 1.5, 3.7, 10.25, -0.5, -2.5]:
        assert gamma_fn(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma_fn(x)


# }}}


# {{{ Mittag-Leffler


def test_ml_alpha_one_is_exp():
    x = np.linspace(0, 100, 1001)
    v = mittag_leffler(-x, 1.0, 1.0)
    assert np.max(np.abs(v - np.exp(-x)) / np.exp(-x)) < 1e-12


def test_ml_half_erfc_value():
    # E_{1/2,1}(-x) = exp(x^2) erfc(x)
    assert mittag_leffler(-1.0, 0.5) == pytest.approx(0.42758357615580700, abs=1e-15)
    assert mittag_leffler(-1.0, 0.5) == pytest.approx(special.erfcx(1.0), rel=1e-14)


def test_ml_half_against_erfcx_wide_range():
    x = np.concatenate([np.linspace(0, 5, 200), np.geomspace(5, 1e6, 200)])
    v = mittag_leffler(-x, 0.5)
    assert np.max(np.abs(v / special.erfcx(x) - 1)) < 1e-13


def test_ml_half_half_closed_form():
    # E_{1/2,1/2}(-x) = 1/sqrt(pi) - x erfcx(x)
    x = np.linspace(0, 3, 60)
    want = 1 / math.sqrt(math.pi) - x * special.erfcx(x)
    assert np.max(np.abs(mittag_leffler(-x, 0.5, 0.5) - want)) < 1e-13


def test_ml_alpha_one_beta_two():
    x = np.linspace(0.01, 50, 300)
    assert np.allclose(mittag_leffler(-x, 1.0, 2.0), -np.expm1(-x) / x, rtol=1e-13, atol=0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 0.95])
@pytest.mark.parametrize("beta_kind", ["one", "alpha", "alpha+1"])
def test_ml_against_mpmath(alpha, beta_kind):
    beta = {"one": 1.0, "alpha": alpha, "alpha+1": alpha + 1.0}[beta_kind]
    for x in [0.0, 0.3, 1.0, 2.5, 6.0]:
        want = ml_mp(-x, alpha, beta, dps=80)
        assert mittag_leffler(-x, alpha, beta) == pytest.approx(want, rel=1e-11, abs=1e-15)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.7, 0.9, 1.0])
def test_ml_monotone_decreasing(alpha):
    x = np.linspace(0, 200, 1000)
    v = mittag_leffler(-x, alpha)
    assert np.all(np.diff(v) < 0)
    assert v[0] == 1.0


def test_ml_scalar_and_array_shapes():
    assert isinstance(mittag_leffler(-1.0, 0.5), float)
    assert mittag_leffler(np.zeros((3, 2)), 0.5).shape == (3, 2)


def test_ml_query_and_domain():
    assert MLQuery(0.5, 1.0, -1.0).evaluate() == mittag_leffler(-1.0, 0.5)
    with pytest.raises(DomainError):
        MLQuery(0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(-1.0, 1.5)
    with pytest.raises(DomainError):
        mittag_leffler(-1.0, 0.5, 0.0)


def test_ml_elementwise_determinism():
    # a value must not depend on its neighbours in the array
    x = -np.linspace(0, 40, 97)
    full = mittag_leffler(x, 0.6, 0.6)
    single = np.array([mittag_leffler(v, 0.6, 0.6) for v in x])
    assert np.array_equal(full, single)


@given(st.floats(0.2, 1.0), st.floats(0.0, 60.0))
def test_ml_bounds_property(alpha, x):
    v = mittag_leffler(-x, alpha)
    assert 0.0 < v <= 1.0


@given(st.floats(0.25, 0.95), st.floats(0.3, 1.5), st.floats(0.0, 30.0))
def test_ml_recurrence_property(alpha, beta, x):
    # E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z)
    lhs = mittag_leffler(-x, alpha, beta)
    rhs = 1.0 / math.gamma(beta) - x * mittag_leffler(-x, alpha, alpha + beta)
    assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, x))


def test_r1_r2_classical_limit():
    r1, r2 = r1_r2(0.9999, 1.0)
    assert r1 == pytest.approx(math.exp(-1), abs=1e-3)
    assert r2 == pytest.approx(math.exp(-1), abs=1e-3)
    with pytest.raises(DomainError):
        r1_r2(0.5, 0.0)


# }}}


# {{{ h_alpha


def test_h_half_closed_form():
    th = np.linspace(0.05, 10, 300)
    got = np.array([h_alpha(DensityQuery(0.5, t)) for t in th])
    want = np.exp(-th**2 / 4) / math.sqrt(math.pi)
    assert np.max(np.abs(got - want)) < 1e-10


def test_psi_series_consistent_with_h():
    q = DensityQuery(0.5, 2.0)
    y = 2.0 ** (-1 / 0.5)
    want = math.exp(-4.0 / 4) / math.sqrt(math.pi)
    # h(theta) = theta^(-1-1/a) psi(theta^(-1/a)) / a
    assert 2.0 ** (-3.0) * psi_alpha(DensityQuery(0.5, y)) / 0.5 == pytest.approx(want, rel=1e-12)
    assert h_alpha(q) == pytest.approx(want, rel=1e-12)


def test_psi_small_argument_fails_loudly():
    with pytest.raises(ConvergenceError):
        psi_alpha(DensityQuery(0.5, 1e-4))


def test_h_window_enforced():
    lo, hi = h_alpha_window(0.5)
    with pytest.raises(OutOfWindowError):
        h_alpha(DensityQuery(0.5, hi * 1.01))
    with pytest.raises(OutOfWindowError):
        h_alpha(DensityQuery(0.5, lo / 2))
    with pytest.raises(DomainError):
        DensityQuery(1.0, 1.0)


def test_h_at_origin_limit():
    # h_alpha(0) = 1/Gamma(1 - alpha)
    for a in (0.3, 0.7):
        assert h_alpha(DensityQuery(a, 1e-7)) == pytest.approx(1 / math.gamma(1 - a), rel=1e-5)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_h_moments(alpha):
    for nu in (0.0, 0.5, 1.0, 2.0, 3.0):
        want = math.gamma(1 + nu) / math.gamma(1 + alpha * nu)
        assert h_moment(alpha, nu) == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_h_laplace_identities(alpha):
    for z in (0.0, -0.5, -1.0, -5.0, -20.0):
        assert h_laplace(alpha, z) == pytest.approx(mittag_leffler(z, alpha, 1.0), rel=1e-9)
        assert h_laplace(alpha, z, weighted=True) == pytest.approx(
            mittag_leffler(z, alpha, alpha), rel=1e-9)


def test_weighted_laplace_at_zero_is_reciprocal_gamma():
    # alpha * first moment = alpha / Gamma(1 + alpha) = 1 / Gamma(alpha)
    assert h_laplace(0.5, 0.0, weighted=True) == pytest.approx(1 / math.gamma(0.5), rel=1e-10)


def test_h_laplace_error_estimate_and_domain():
    val, err = h_laplace(0.5, -1.0, return_error=True)
    assert err < 1e-8
    with pytest.raises(DomainError):
        h_laplace(0.5, 0.1)
    with pytest.raises(DomainError):
        h_moment(0.5, -1.0)


@given(st.floats(0.15, 0.9), st.floats(0.01, 3.0))
def test_h_nonnegative_property(alpha, theta):
    assert h_alpha(DensityQuery(alpha, theta)) >= 0.0


# }}}
