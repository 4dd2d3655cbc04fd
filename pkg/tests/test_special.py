import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sc

from hwlaw.quadrature import DomainError
from hwlaw.special import (
    BESSEL_X_MAX,
    HermiteOrder,
    bessel_i,
    erf_fn,
    gamma_fn,
    hermite_h,
    hermite_integral,
    hermite_scaled,
)


@given(st.floats(0.01, 50.0))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-13)


def test_gamma_domain():
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(DomainError):
        gamma_fn(0.0)


@given(st.floats(-6, 6))
def test_erf_is_odd(x):
    assert erf_fn(-x) == -erf_fn(x)


@given(st.floats(0, 8), st.floats(0.01, BESSEL_X_MAX))
def test_bessel_against_scipy(nu, x):
    ref = sc.iv(nu, x)
    assert bessel_i(nu, x) == pytest.approx(ref, rel=1e-13, abs=1e-300)


@given(st.floats(1.0, 6.0), st.floats(0.1, 25.0))
def test_bessel_recurrence(nu, x):
    lhs = bessel_i(nu - 1, x) - bessel_i(nu + 1, x)
    assert lhs == pytest.approx(2 * nu / x * bessel_i(nu, x), rel=1e-11)


def test_bessel_domain_and_golden():
    # I_0(1) from its series, 30 digits
    assert bessel_i(0.0, 1.0) == pytest.approx(1.2660658777520083, rel=1e-15)
    assert bessel_i(0.5, 1.0) == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-14)
    with pytest.raises(DomainError):
        bessel_i(-1.0, 1.0)
    with pytest.raises(DomainError):
        bessel_i(0.0, BESSEL_X_MAX + 1)


def test_hermite_order_domain():
    with pytest.raises(DomainError):
        HermiteOrder(-1.5)
    assert HermiteOrder(3.0).is_integer
    assert not HermiteOrder(0.5).is_integer


@pytest.mark.parametrize("mu", [-0.5, 0.3, 1.5, 2.7])
@pytest.mark.parametrize("x", [-8.0, -4.0, -1.2, 0.0, 0.7, 2.5, 5.0, 8.0])
def test_hermite_against_mpmath(mu, x):
    ref = float(mp.hermite(mu, x))
    assert hermite_h(mu, x) == pytest.approx(ref, rel=1e-10, abs=1e-12)


@given(st.integers(0, 8), st.floats(-3, 3))
def test_hermite_integer_parity(n, x):
    assert hermite_h(n, -x) == pytest.approx((-1) ** n * hermite_h(n, x), rel=1e-12, abs=1e-12)


@given(st.floats(0.05, 4.0), st.floats(-2.5, 2.5))
def test_hermite_recurrence(mu, x):
    # H_{mu+1}(x) = 2x H_mu(x) - 2 mu H_{mu-1}(x)
    lhs = hermite_h(mu + 1, x)
    rhs = 2 * x * hermite_h(mu, x) - 2 * mu * hermite_h(mu - 1, x)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)


def test_hermite_minus_one_is_scaled_erfc():
    y = np.linspace(-3, 6, 13)
    np.testing.assert_allclose(hermite_scaled(-1, y), 0.5 * math.sqrt(math.pi) * sc.erfc(y), rtol=1e-15)


@pytest.mark.parametrize("mu", [-0.5, 0.5, 1.25])
def test_hermite_scaled_matches_across_switch(mu):
    y = np.array([2.99, 3.01, 8.0, -8.0])
    ref = np.array([float(mp.exp(-mp.mpf(v) ** 2) * mp.hermite(mu, v)) for v in y])
    np.testing.assert_allclose(hermite_scaled(mu, y), ref, rtol=1e-9, atol=0)


def test_spec_examples():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-15)
    assert erf_fn(0.0) == 0.0
    assert abs(erf_fn(10.0) - 1.0) <= 1e-15
    # Taylor series of erf at 1 summed in exact rationals
    assert erf_fn(1.0) == pytest.approx(0.8427007929497149, rel=1e-15)
    assert bessel_i(0.0, 0.0) == 1.0
    assert bessel_i(1.0, 0.0) == 0.0
    assert bessel_i(0.5, 1.0) == pytest.approx(0.9376748882454876, rel=1e-14)
    assert hermite_h(0, 3.3) == 1.0
    assert hermite_h(1, 0.7) == pytest.approx(1.4)
    assert hermite_h(-1, 0.0) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert hermite_h(2, 1.0) == pytest.approx(2.0)


@pytest.mark.parametrize("n", range(9))
def test_integral_representation_matches_recurrence(n):
    x = np.linspace(-3, 3, 25)
    ref = hermite_h(n, x)
    np.testing.assert_allclose(hermite_integral(n, x), ref, rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("x", [-0.5, 0.0, 0.7, 2.5])
def test_minus_one_continuity(x):
    assert abs(hermite_integral(-1 + 1e-4, x) - hermite_h(-1, x)) < 1e-3


def test_minus_one_continuity_where_h_is_large():
    # H_{-1}(-2) is about 96.5 and dH/dmu about 115, so the gap at mu = -1 + 1e-4
    # is genuinely 1e-2; the continuity statement is relative there
    a, b = hermite_integral(-1 + 1e-4, -2.0), hermite_h(-1, -2.0)
    assert abs(a - b) < 1e-3 * abs(b)


def test_integral_domain():
    with pytest.raises(DomainError):
        hermite_integral(0.5, 9.0)
    with pytest.raises(DomainError):
        hermite_integral(-1.0, 0.0)


@pytest.mark.parametrize("mu", [-0.5, 0.5, 2.5])
def test_hermite_scaled_far_right_tail_is_zero_not_nan(mu):
    out = hermite_scaled(mu, np.array([41.0, 1e6, np.inf]))
    assert np.all(out == 0.0)
