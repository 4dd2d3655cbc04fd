import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hwlaw.quadrature import (
    DomainError,
    IntegralEstimate,
    QuadratureConfig,
    expect_gaussian,
    gauss_kronrod,
    gaussian_truncation,
    integrate_halfline,
    integrate_interval,
    integrate_line,
)


def test_config_rejects_bad_tolerances():
    with pytest.raises(DomainError):
        QuadratureConfig(abs_tol=0.0, rel_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(truncation_sigma=3.0)
    with pytest.raises(DomainError):
        QuadratureConfig(osc_nodes_per_period=4)


def test_kronrod_exact_for_polynomials():
    k, err, _ = gauss_kronrod(lambda x: x**20 - 3 * x**7, np.array([0.0]), np.array([1.0]))
    assert k[0, 0] == pytest.approx(1 / 21 - 3 / 8, rel=1e-14)


def test_interval_smooth(cfg):
    est = integrate_interval(np.sin, 0.0, math.pi, cfg)
    assert est.converged
    assert abs(est.value - 2.0) < 1e-13


def test_interval_vector_valued_rows(cfg):
    est = integrate_interval(lambda x: np.stack([x, x * x]), 0.0, 1.0, cfg)
    np.testing.assert_allclose(est.value, [0.5, 1 / 3], rtol=1e-14)


def test_interval_highly_oscillatory(cfg):
    est = integrate_interval(lambda x: np.cos(200 * x), 0.0, 1.0, cfg, n_initial=64)
    assert abs(est.value - math.sin(200) / 200) < 1e-12


def test_interval_empty_and_infinite(cfg):
    assert integrate_interval(np.sin, 1.0, 1.0, cfg).value == 0.0
    with pytest.raises(DomainError):
        integrate_interval(np.sin, 0.0, math.inf, cfg)


def test_nonconvergence_is_flagged():
    tight = QuadratureConfig(abs_tol=1e-15, rel_tol=0.0, max_subdivisions=2)
    est = integrate_interval(lambda x: np.abs(x - 0.3) ** 0.5, 0.0, 1.0, tight, n_initial=1)
    assert not est.converged


def test_scaled_rejudges_convergence(cfg):
    est = IntegralEstimate(1.0, 1e-12, 21, True)
    assert not est.scaled(10.0, cfg.with_(rel_tol=1e-14, abs_tol=1e-14)).converged
    assert float(est.scaled(2.0)) == 2.0


@given(st.floats(0.05, 5.0), st.floats(0.0, 3.0))
def test_gaussian_characteristic_function(t, xi):
    cfg = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-11)
    est = expect_gaussian(lambda x: np.cos(xi * x), t, cfg, freq=xi)
    assert abs(est.value - math.exp(-xi * xi * t / 2)) < 1e-11


@given(st.floats(0.1, 3.0), st.floats(0.0, 2.0))
def test_gaussian_moment_generating_function(t, k):
    cfg = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-12)
    est = expect_gaussian(lambda x: np.cosh(k * x), t, cfg, growth=k)
    assert est.value == pytest.approx(math.exp(k * k * t / 2), rel=1e-10)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.2, 2.0))
def test_expectation_is_linear(a, b, t):
    cfg = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-12)
    f, g = (lambda x: np.cos(x) * np.exp(-x * x)), (lambda x: x * x)
    lhs = expect_gaussian(lambda x: a * f(x) + b * g(x), t, cfg).value
    rhs = a * expect_gaussian(f, t, cfg).value + b * expect_gaussian(g, t, cfg).value
    assert abs(lhs - rhs) < 1e-11 * (1 + abs(a) + abs(b))


def test_shifted_contour_matches_real_axis(cfg):
    r, t = 3.0, 1.0
    plain = expect_gaussian(lambda x: np.cos(r * np.sinh(x)) * np.cosh(x), t, cfg, freq=r)
    moved = expect_gaussian(lambda z: np.exp(1j * r * np.sinh(z)) * np.cosh(z), t, cfg, shift=0.8)
    assert abs(plain.value - moved.value) < 1e-11


def test_gaussian_truncation_covers_growth(cfg):
    L = gaussian_truncation(1.0, 2.0, cfg)
    tail = math.exp(2 * L - L * L / 2)
    assert tail < cfg.abs_tol
    assert gaussian_truncation(1.0, 0.0, cfg) >= cfg.truncation_sigma


def test_expect_gaussian_domain(cfg):
    with pytest.raises(DomainError):
        expect_gaussian(np.cos, 0.0, cfg)


def test_halfline_and_line(cfg):
    est = integrate_halfline(lambda r: np.exp(-r), cfg)
    assert abs(est.value - 1.0) < 1e-12
    est = integrate_halfline(lambda r: r ** -0.5 * np.exp(-r), cfg, endpoint_exponent=-0.5)
    assert abs(est.value - math.sqrt(math.pi)) < 1e-10
    est = integrate_halfline(lambda r: np.exp(-r), cfg, log_map=True)
    assert abs(est.value - 1.0) < 1e-12
    est = integrate_line(lambda x: 1 / np.cosh(x), cfg)
    assert abs(est.value - math.pi) < 1e-11
    with pytest.raises(DomainError):
        integrate_halfline(lambda r: 1 / r, cfg, endpoint_exponent=-1.0)
