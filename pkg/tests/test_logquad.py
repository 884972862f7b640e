"""Tests for log-domain quadrature"""
import math

import numpy as np
import pytest

from ergodiff.services.logquad import LogCumulative, log_expm1_ratio, log_increments, log_integral
from ergodiff.services.recurrence_classifier import (
    brownian_profile,
    outer_integral_logdomain,
    outer_log_increments,
    z4_profile,
)


def test_log_expm1_ratio():
    """Test log((e^x - 1)/x) across small, moderate and huge arguments"""
    x = np.array([0.0, 1e-12, 1.0, -1.0, 800.0, -800.0])
    out = log_expm1_ratio(x)
    assert out[0] == 0.0
    assert out[1] == pytest.approx(5e-13, abs=1e-15)
    assert out[2] == pytest.approx(math.log(math.e - 1.0))
    assert out[3] == pytest.approx(math.log(1.0 - math.exp(-1.0)))
    assert out[4] == pytest.approx(800.0 - math.log(800.0))
    assert out[5] == pytest.approx(-math.log(800.0))


def test_exponential_integrand():
    """Test a pure exponential is integrated exactly"""
    assert log_integral(lambda u: u, 0.0, 1.0) == pytest.approx(math.log(math.e - 1.0), rel=1e-12)


def test_gaussian_integrand():
    """Test int_0^10 exp(-u^2) = sqrt(pi)/2 erf(10)"""
    value = log_integral(lambda u: -u ** 2, 0.0, 10.0)
    assert value == pytest.approx(math.log(math.sqrt(math.pi) / 2 * math.erf(10.0)), abs=1e-9)


def test_overflowing_integrand():
    """Test exp(2u^4) on [1, 3] without leaving the log domain"""
    # e^g/g' (1 + g''/g'^2) with g = 2u^4 at u = 3
    expected = 162.0 - math.log(216.0) + math.log1p(216.0 / 216.0 ** 2)
    assert log_integral(lambda u: 2 * u ** 4, 1.0, 3.0) == pytest.approx(expected, abs=1e-2)


def test_degenerate_intervals():
    """Test empty and reversed intervals"""
    assert log_integral(lambda u: u, 2.0, 2.0) == -math.inf
    with pytest.raises(ValueError):
        log_integral(lambda u: u, 2.0, 1.0)


def test_log_increments_sum_to_total():
    """Test per-interval pieces add up to the whole integral"""
    g = lambda u: -np.log(u)  # noqa: E731
    pieces = log_increments(g, 1.0, [2.0, 4.0, 8.0])
    assert np.allclose(np.exp(pieces), [math.log(2.0)] * 3, rtol=1e-9)
    assert np.logaddexp.reduce(pieces) == pytest.approx(log_integral(g, 1.0, 8.0), rel=1e-9)


def test_log_cumulative():
    """Test the running integral of a constant integrand"""
    cumulative = LogCumulative(lambda u: np.zeros_like(u), 1.0, 16.0)
    s = np.array([1.5, 2.0, 10.0, 16.0])
    assert np.allclose(cumulative(s), np.log(s - 1.0), rtol=1e-12)
    assert cumulative(np.array([1.0]))[0] == -math.inf


def test_brownian_plane_log_log():
    """Test log int_1^N du/u = log log N"""
    for N in (10.0, 100.0, 4096.0):
        value = outer_integral_logdomain(brownian_profile(2), "exp_minus_upper", 1.0, N)
        assert value == pytest.approx(math.log(math.log(N)), rel=1e-8)


def test_z4_lower_outer_integral():
    """Test int_1^3 exp(2(u^4 - 1))/u du sits near its Laplace estimate"""
    value = outer_integral_logdomain(z4_profile(), "exp_minus_lower", 1.0, 3.0)
    assert 150.0 <= value <= 162.0
    assert value == pytest.approx(160.0 - math.log(3.0) - math.log(216.0 - 1.0 / 3.0), abs=0.05)


def test_z4_upper_tail_vanishes():
    """Test the exp(-I_upper) tail is negligible after two doublings"""
    increments = outer_log_increments(z4_profile(), "exp_minus_upper", 1.0, [2.0, 4.0, 8.0])
    total = np.logaddexp.reduce(increments)
    assert increments[-1] - total < math.log(1e-60)
    assert np.all(np.isfinite(increments))


def test_cancelling_exponent():
    """Test an exponent formed as a difference of large terms still converges"""
    big = 2e7

    def g(u):
        return (big * u ** 4 + u) - big * u ** 4

    pieces = log_increments(g, 0.0, [0.5, 1.0], magnitude=lambda u: big * u ** 4)
    assert np.logaddexp.reduce(pieces) == pytest.approx(math.log(math.e - 1.0), abs=1e-6)
