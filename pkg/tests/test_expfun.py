import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import THETA_GOLDEN
from hwlaw.expfun import (
    ExpFunctionalLaw,
    GCache,
    NormConstant,
    cdf_a_mu,
    density_a_mu,
    density_curve,
    hermite_indicator_moment_rhs,
    joint_density_b_a,
    joint_density_expb_a,
    joint_density_ratio_a,
    laplace_joint_rhs,
    normalization,
    recip_exp_moment_rhs,
    v_upper,
)
from hwlaw.montecarlo import PathConfig, mean_and_stderr, sample_bm_exp_functional
from hwlaw.quadrature import DomainError, QuadratureConfig, expect_gaussian, integrate_interval
from hwlaw.special import hermite_h

LOOSE = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-10)


@pytest.fixture(scope="module")
def ensemble():
    # mu = 0, t = 1; trapezoid bias O(dt) = 5e-4 relative, well inside the MC error
    return sample_bm_exp_functional(0.0, PathConfig(1.0, 2000, 20000, 11))


def test_law_invariants():
    with pytest.raises(DomainError):
        ExpFunctionalLaw(-1.0, 1.0, "hermite")
    with pytest.raises(DomainError):
        ExpFunctionalLaw(-1.0, 1.0, "negibp")
    with pytest.raises(DomainError):
        ExpFunctionalLaw(0.0, 0.0)
    with pytest.raises(DomainError):
        ExpFunctionalLaw(0.0, 1.0, "bogus")
    ExpFunctionalLaw(-3.0, 1.0, "double")


@given(st.floats(-3, 3), st.floats(0.1, 4))
def test_norm_constants_positive(mu, t):
    c = NormConstant.of(mu, t)
    assert c.c_mu_t > 0 and c.c_t > 0
    assert c.c_t == pytest.approx(math.exp(math.pi**2 / (8 * t)))


def test_joint_golden_value():
    assert joint_density_b_a(0.0, 1.0, 1.0) == pytest.approx(math.exp(-1) * THETA_GOLDEN[(1.0, 1.0)], rel=1e-12)


def test_joint_change_of_variables():
    assert joint_density_expb_a(1.0, 1.0, 1.0) == pytest.approx(joint_density_b_a(0.0, 1.0, 1.0), rel=1e-15)
    assert joint_density_expb_a(math.e, 2.0, 1.0) == pytest.approx(joint_density_b_a(1.0, 2.0, 1.0) / math.e,
                                                                   rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, 1.5])
def test_joint_v_marginal_is_gaussian(x):
    est = integrate_interval(lambda s: joint_density_b_a(x, np.exp(s), 1.0, LOOSE) * np.exp(s),
                             math.log(1e-3), math.log(v_upper(0.0, 1.0)), LOOSE.with_(abs_tol=1e-10), n_initial=32)
    assert est.value == pytest.approx(math.exp(-x * x / 2) / math.sqrt(2 * math.pi), abs=1e-6)


def _gl(lo, hi, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def test_joint_total_mass():
    # product Gauss-Legendre over x in [-6, 6] (Gaussian tail 2e-9) and log v
    xs, wx = _gl(-6.0, 6.0, 60)
    ss, ws = _gl(math.log(1e-3), math.log(v_upper(0.0, 1.0)), 60)
    total = sum(w * math.exp(s) * np.dot(wx, joint_density_b_a(xs, math.exp(s), 1.0, LOOSE))
                for s, w in zip(ss, ws))
    assert abs(total - 1) < 1e-6


@pytest.mark.parametrize("mu", [0.5, 1.0])
def test_density_from_joint_law(mu):
    # first line of the A^(mu) law: D(mu, t, v) = e^{-mu^2 t/2} int u^mu joint(u, v) du
    t, v = 1.0, 1.3
    est = integrate_interval(lambda s: joint_density_expb_a(np.exp(s), v, t, LOOSE) * np.exp((mu + 1) * s),
                             math.log(1e-8), math.log(60.0), LOOSE.with_(abs_tol=1e-11), n_initial=48)
    direct = float(density_a_mu(v, ExpFunctionalLaw(mu, t)).value)
    assert est.value * math.exp(-mu * mu * t / 2) == pytest.approx(direct, rel=1e-7)


def test_density_examples():
    v = 1.0
    a = float(density_a_mu(v, ExpFunctionalLaw(1.0, 1.0, "hermite")).value)
    b = float(density_a_mu(v, ExpFunctionalLaw(1.0, 1.0, "double")).value)
    assert abs(a - b) <= 1e-6 * b
    # mu = 0 closed form
    c_t = math.exp(math.pi**2 / 8)
    ref = c_t * expect_gaussian(lambda x: np.cosh(x) / math.sqrt(2 * math.pi) * np.exp(-np.cosh(x) ** 2 / 2)
                                * np.cos(math.pi * x / 2), 1.0, LOOSE).value
    assert float(density_a_mu(v, ExpFunctionalLaw(0.0, 1.0)).value) == pytest.approx(ref, rel=1e-10)
    a = float(density_a_mu(v, ExpFunctionalLaw(-1.5, 1.0, "negibp")).value)
    b = float(density_a_mu(v, ExpFunctionalLaw(-1.5, 1.0, "double")).value)
    assert abs(a - b) <= 1e-5 * b


@pytest.mark.parametrize("mu", [-2.0, -1.5, -0.5, 0.0, 0.5, 1.0, 2.0])
def test_normalization(mu):
    method = "hermite" if mu > -1 else "negibp"
    assert abs(float(normalization(ExpFunctionalLaw(mu, 1.0, method)).value) - 1) < 1e-4


@pytest.mark.parametrize("mu", [0.0, 0.5, 1.0])
def test_mean_of_a(mu):
    # E[A_t^(mu)] = (e^{2(1+mu)t} - 1)/(2(1+mu))
    law = ExpFunctionalLaw(mu, 1.0)
    est = integrate_interval(lambda s: np.asarray(density_a_mu(np.exp(s), law).value) * np.exp(2 * s),
                             math.log(1e-4), math.log(v_upper(mu, 1.0)), LOOSE.with_(abs_tol=1e-9), n_initial=32)
    assert est.value == pytest.approx((math.exp(2 * (1 + mu)) - 1) / (2 * (1 + mu)), rel=1e-6)


def test_density_vectorized_and_nonnegative():
    v = np.geomspace(0.05, 30, 25)
    d = density_curve(v, ExpFunctionalLaw(0.5, 1.0))
    assert d.shape == v.shape
    assert np.all(d > -1e-12)
    scalar = [float(density_a_mu(x, ExpFunctionalLaw(0.5, 1.0)).value) for x in v[:3]]
    np.testing.assert_allclose(d[:3], scalar, rtol=1e-12)


def test_gcache_reuse():
    cache = GCache(1.0)
    law = ExpFunctionalLaw(0.3, 1.0, "double")
    density_a_mu(1.0, law, cache=cache)
    n = len(cache)
    density_a_mu(2.0, law, cache=cache)
    assert len(cache) == n


def test_density_domain():
    with pytest.raises(DomainError):
        density_a_mu(0.0, ExpFunctionalLaw(0.0, 1.0))


@pytest.mark.parametrize("mu", [0.0, 1.0])
def test_cdf_closed_forms(mu):
    law = ExpFunctionalLaw(mu, 1.0)
    V = 2.0
    est = integrate_interval(lambda s: np.asarray(density_a_mu(np.exp(s), law).value) * np.exp(s),
                             math.log(1e-4), math.log(V), LOOSE.with_(abs_tol=1e-11), n_initial=16)
    assert cdf_a_mu(V, mu, 1.0) == pytest.approx(est.value, abs=1e-9)
    vals = cdf_a_mu(np.array([0.1, 1.0, 10.0, 1e3]), mu, 1.0)
    assert np.all(np.diff(vals) > 0) and vals[-1] <= 1 + 1e-12


def test_cdf_generic_mu_matches_limit():
    assert cdf_a_mu(v_upper(0.5, 1.0), 0.5, 1.0) == pytest.approx(1.0, abs=1e-6)


def test_ratio_symmetry():
    # (X, Y) = (e^{-2B}A, A) has density f(1/x, y)/x^2 with f the (e^{2B}/A, A) density
    grid = [0.5, 1.0, 2.0]
    for x in grid:
        for y in grid:
            fxy = joint_density_ratio_a(1 / x, y, 1.0) / x**2
            fyx = joint_density_ratio_a(1 / y, x, 1.0) / y**2
            assert abs(fxy - fyx) <= 1e-8


@pytest.mark.parametrize("v", [0.5, 1.0, 3.0])
def test_ratio_marginal(v):
    cache = GCache(1.0)
    est = integrate_interval(lambda s: joint_density_ratio_a(np.exp(s), v, 1.0, cache=cache) * np.exp(s),
                             math.log(1e-10), math.log(200.0), LOOSE.with_(abs_tol=1e-10), n_initial=32)
    assert est.value == pytest.approx(float(density_a_mu(v, ExpFunctionalLaw(0.0, 1.0)).value), abs=1e-5)


def test_ratio_total_mass():
    cache = GCache(1.0)
    us, wu = _gl(math.log(1e-10), math.log(200.0), 120)
    ss, ws = _gl(math.log(1e-3), math.log(v_upper(0.0, 1.0)), 120)
    total = 0.0
    for s, w in zip(ss, ws):
        v = math.exp(s)
        dens = joint_density_ratio_a(np.exp(us), np.full(us.size, v), 1.0, cache=cache)
        total += w * v * np.dot(wu, dens * np.exp(us))
    assert abs(total - 1) < 1e-3


def test_laplace_joint_examples():
    assert float(laplace_joint_rhs(0.0, 0.0, 1.0).value) == pytest.approx(1.0, abs=1e-13)
    assert float(laplace_joint_rhs(0.0, 0.0, 1.0, "shifted").value) == pytest.approx(1.0, abs=1e-12)
    bou = expect_gaussian(lambda x: np.cos(np.sinh(x)), 1.0, LOOSE, freq=3.0).value
    assert float(laplace_joint_rhs(0.0, 1.0, 1.0).value) == pytest.approx(bou, abs=1e-10)
    a, b = (float(laplace_joint_rhs(1.0, 1.0, 1.0, f).value) for f in ("sinh", "shifted"))
    assert abs(a - b) < 1e-8
    with pytest.raises(DomainError):
        laplace_joint_rhs(-1.0, 0.0, 1.0)


@given(st.floats(0, 4), st.floats(0, 4), st.sampled_from([0.5, 1.0, 2.0]))
def test_laplace_joint_forms_agree(lam, r, t):
    a, b = (float(laplace_joint_rhs(lam, r, t, f).value) for f in ("sinh", "shifted"))
    assert abs(a - b) < 1e-8


def test_laplace_joint_against_mc(ensemble):
    b, a = ensemble.terminal_b, ensemble.functional_a
    for lam in (0.0, 0.5, 1.0):
        for r in (0.0, 0.5, 1.0):
            m, se = mean_and_stderr(np.exp(-lam * np.exp(b) - 0.5 * (lam**2 + r**2) * a))
            rhs = float(laplace_joint_rhs(lam, r, 1.0).value)
            assert abs(m - rhs) <= 3 * se + 1e-3 * abs(rhs)


def test_hermite_indicator_total_mass():
    assert float(hermite_indicator_moment_rhs(0, 1e-4, math.inf, 1.0).value) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("n", [1, 2])
def test_hermite_indicator_against_mc(ensemble, n):
    b, a = ensemble.terminal_b, ensemble.functional_a
    inside = (a > 0.5) & (a < 2.0)
    m, se = mean_and_stderr(np.where(inside, hermite_h(n, -np.exp(b) / np.sqrt(2 * a)), 0.0))
    rhs = float(hermite_indicator_moment_rhs(n, 0.5, 2.0, 1.0).value)
    assert abs(m - rhs) <= 3 * se


def test_recip_exp_moment():
    assert float(recip_exp_moment_rhs(0.0, 1e-4, math.inf, 1.0).value) == pytest.approx(1.0, abs=1e-3)
    vals = [float(recip_exp_moment_rhs(al, 0.5, 2.0, 1.0).value) for al in (0.0, 0.5, 1.0, 3.0)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        recip_exp_moment_rhs(-0.1, 0.5, 2.0, 1.0)


def test_recip_exp_moment_against_mc(ensemble):
    b, a = ensemble.terminal_b, ensemble.functional_a
    inside = (a > 0.5) & (a < 2.0)
    m, se = mean_and_stderr(np.where(inside, np.exp(-np.exp(2 * b) / (2 * a)), 0.0))
    assert abs(m - float(recip_exp_moment_rhs(1.0, 0.5, 2.0, 1.0).value)) <= 3 * se


def test_reciprocal_moment_finite_and_stable(ensemble):
    x = np.exp(0.4 * np.exp(2 * ensemble.terminal_b) / ensemble.functional_a)
    half = x[: x.size // 2]
    m1, s1 = mean_and_stderr(half)
    m2, s2 = mean_and_stderr(x)
    assert np.isfinite(m2)
    assert abs(m2 - m1) <= 4 * s1
