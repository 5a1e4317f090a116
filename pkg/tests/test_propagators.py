import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from fracfujita.field import GridSpec, gaussian_bump, heat_multiply, mass
from fracfujita.propagators import (
    AlphaParams,
    SubordinationRule,
    _cache,
    apply_alphaS,
    apply_P,
    apply_P_subordination,
    multiplier,
    subordination_multiplier,
)
from fracfujita.special_functions import DomainError, mittag_leffler


@pytest.fixture(scope="module")
def bump():
    return gaussian_bump(GridSpec(1, 8.0, 256), 1.0, 0.5)


def test_params():
    assert AlphaParams(0.5, 1).p == 3.0
    assert AlphaParams(0.5, 2).p == 2.0
    assert AlphaParams(1.0).classical
    for bad in (dict(alpha=0.0), dict(alpha=1.2), dict(alpha=0.5, dim=3)):
        with pytest.raises(DomainError):
            AlphaParams(**bad)


@pytest.mark.parametrize("alpha", [0.5, 0.7, 0.9])
@pytest.mark.parametrize("t", [0.2, 1.0])
def test_P_matches_subordination(bump, alpha, t):
    p = AlphaParams(alpha)
    a = apply_P(p, t, bump).values
    b = apply_P_subordination(p, t, bump).values
    assert np.max(np.abs(a - b)) < 1e-6


def test_classical_passthrough(bump):
    p = AlphaParams(1.0)
    for t in (0.1, 0.7):
        assert np.max(np.abs(apply_P(p, t, bump).values - heat_multiply(bump, t).values)) < 1e-12
        assert np.max(np.abs(apply_alphaS(p, t, bump).values - heat_multiply(bump, t).values)) < 1e-12
    with pytest.raises(DomainError):
        multiplier(bump.grid, 1.0, 0.5, 1.0)


def test_half_order_multiplier_is_erfcx():
    g = GridSpec(1, 8.0, 64)
    m = multiplier(g, 0.5, 1.0, 0.3)
    assert np.allclose(m, special.erfcx(math.sqrt(0.3) * g.freq_sq), rtol=1e-13)


def test_mass_of_P_and_alphaS(bump):
    p = AlphaParams(0.6)
    assert mass(apply_P(p, 0.5, bump)) == pytest.approx(1.0, rel=1e-12)
    # zero mode of alpha S is E_{a,a}(0) = 1/Gamma(a)
    assert mass(apply_alphaS(p, 0.5, bump)) == pytest.approx(1 / math.gamma(0.6), rel=1e-12)


def test_P_at_zero_and_domain(bump):
    p = AlphaParams(0.5)
    assert apply_P(p, 0.0, bump) is bump
    with pytest.raises(DomainError):
        apply_P(p, -1.0, bump)
    with pytest.raises(DomainError):
        apply_alphaS(p, 0.0, bump)
    with pytest.raises(DomainError):
        apply_P_subordination(AlphaParams(1.0), 1.0, bump)


def test_subordination_multiplier_error_estimate():
    y = np.array([0.0, 0.5, 3.0, 20.0])
    val, err = subordination_multiplier(0.7, y, SubordinationRule(), return_error=True)
    assert np.allclose(val, mittag_leffler(-y, 0.7), atol=1e-9)
    assert np.all(err < 1e-6)


@given(st.floats(0.3, 0.95), st.floats(0.01, 2.0))
def test_P_positivity_preserving(alpha, t):
    g = GridSpec(1, 8.0, 128)
    u = gaussian_bump(g, 1.0, 0.5)
    v = apply_P(AlphaParams(alpha), t, u)
    assert v.values.min() > -1e-12 * v.sup


def test_multiplier_cache_concurrent_reads_are_consistent():
    _cache.clear()
    g = GridSpec(1, 8.0, 128)
    ts = [0.01 * k for k in range(1, 40)]

    def work(t):
        return multiplier(g, 0.55, 0.55, t)

    with ThreadPoolExecutor(8) as ex:
        a = list(ex.map(work, ts * 4))
    serial = [work(t) for t in ts * 4]
    for x, y in zip(a, serial):
        assert np.array_equal(x, y)
    assert not a[0].flags.writeable
