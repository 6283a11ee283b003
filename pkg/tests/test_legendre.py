# tests/test_legendre.py

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dggkit.legendre import (
    arcsinh, chi, h_inverse, lambda_star, sigma_factor, zeta, zeta_bounds_check,
    zeta_d, zeta_t, zeta_variational,
)

positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)
distances = st.floats(min_value=0.0, max_value=1e3, allow_nan=False, allow_infinity=False)


# ----------------------------------------------------------------------
# Elementary pieces
# ----------------------------------------------------------------------

@pytest.mark.parametrize("x", [0.0, 1e-9, 3e-6, 0.5, 1.0, 40.0, 1e7, 1e9, 1e12, -2.5, -1e-7])
def test_arcsinh_agrees_with_math(x):
    assert arcsinh(x) == pytest.approx(math.asinh(x), rel=1e-14, abs=1e-300)


def test_chi():
    assert chi(0.0) == 0.0
    assert chi(1.0) == pytest.approx(math.cosh(1.0) - 1.0, rel=1e-14)
    # no cancellation for small arguments
    assert chi(1e-8) == pytest.approx(5e-17, rel=1e-9)


def test_sigma_factor():
    assert sigma_factor(1.0) == pytest.approx(math.asinh(1.0))
    assert sigma_factor(1e6) == pytest.approx(1.0, abs=1e-9)
    assert sigma_factor(0.1) < sigma_factor(1.0) < sigma_factor(10.0) < 1.0
    with pytest.raises(ValueError):
        sigma_factor(0.0)


# ----------------------------------------------------------------------
# zeta
# ----------------------------------------------------------------------

def test_zeta_reference_value():
    assert f"{zeta(1.0, 1.0):.7f}" == "0.4671600"
    assert zeta(1.0, 1.0) == pytest.approx(math.asinh(1.0) - math.sqrt(2.0) + 1.0, rel=1e-13)


def test_zeta_edge_values():
    assert zeta(3.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        zeta(0.0, 1.0)
    with pytest.raises(ValueError):
        zeta(1.0, -1.0)


def test_closed_form_matches_variational():
    grid = np.logspace(-2.0, 2.0, 30)
    for t in grid:
        for d in grid:
            assert zeta(t, d) == pytest.approx(zeta_variational(t, d), rel=1e-9, abs=1e-12), (t, d)


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_zeta_increasing_and_convex_in_distance(t):
    values = np.array([zeta(t, float(d)) for d in range(41)])
    first, second = np.diff(values), np.diff(values, n=2)
    assert np.all(first > 0)
    assert np.all(second >= -1e-12 * values.max())


@given(t=positive, d=distances, c=st.floats(min_value=0.1, max_value=10.0))
def test_zeta_is_homogeneous(t, d, c):
    assert zeta(c * t, c * d) == pytest.approx(c * zeta(t, d), rel=1e-9, abs=1e-300)


@given(t=positive, d=distances)
def test_zeta_below_quadratic(t, d):
    assert zeta(t, d) <= d * d / (2.0 * t) * (1.0 + 1e-12) + 1e-300


@settings(max_examples=200)
@given(t=positive, d=st.floats(min_value=1e-3, max_value=1e3))
def test_zeta_monotone(t, d):
    assert zeta(1.5 * t, d) <= zeta(t, d)
    assert zeta(t, 1.5 * d) >= zeta(t, d)


def test_small_ratio_series_is_continuous():
    t = 1.0
    below, above = zeta(t, 0.99e-6), zeta(t, 1.01e-6)
    assert below < above
    assert above == pytest.approx(0.5 * 1.01e-6 ** 2, rel=1e-6)


def test_large_time_limit():
    t = 1e6
    assert zeta(t, 1.0) * 2.0 * t == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("t, d", [(0.5, 1.0), (2.0, 3.0), (10.0, 0.1)])
def test_derivatives(t, d):
    step = 1e-6
    fd_t = (zeta(t + step, d) - zeta(t - step, d)) / (2 * step)
    fd_d = (zeta(t, d + step) - zeta(t, d - step)) / (2 * step)
    assert zeta_t(t, d) == pytest.approx(fd_t, rel=1e-6, abs=1e-9)
    assert zeta_d(t, d) == pytest.approx(fd_d, rel=1e-6, abs=1e-9)
    assert zeta_t(t, d) == pytest.approx(-chi(lambda_star(t, d)), rel=1e-12)


# ----------------------------------------------------------------------
# h = inverse of zeta(., 1)
# ----------------------------------------------------------------------

@pytest.mark.parametrize("a", [1e-6, 1e-3, 0.2, 0.46716, 1.0, 5.0, 30.0])
def test_h_inverse_round_trip(a):
    t = h_inverse(a)
    assert zeta(t, 1.0) == pytest.approx(a, rel=1e-10)


def test_h_inverse_known_point():
    assert h_inverse(zeta(1.0, 1.0)) == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("a", [0.0, -1.0, math.inf])
def test_h_inverse_domain(a):
    with pytest.raises(ValueError):
        h_inverse(a)


# ----------------------------------------------------------------------
# Quadratic envelopes
# ----------------------------------------------------------------------

@pytest.mark.parametrize("sigma", [0.05, 0.5, 1.0, 4.0])
def test_envelopes_hold_in_regime(sigma):
    d = 3.0
    for t in (sigma * d, 2 * sigma * d, 50.0):
        report = zeta_bounds_check(t, d, sigma)
        assert report.passed
        assert {e.label for e in report.entries} == {"upper", "lower"}


def test_lower_envelope_skipped_outside_regime():
    report = zeta_bounds_check(0.1, 3.0, 1.0)
    assert report.passed
    assert [e.label for e in report.entries] == ["upper"]
    assert report.notes
