import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from hwlaw.bessel import BesselParams
from hwlaw.expfun import cdf_a_mu
from hwlaw.montecarlo import (
    PathConfig,
    PathEnsemble,
    bougerol_check,
    ks_statistic,
    ks_threshold,
    ks_two_sample,
    ks_two_sample_threshold,
    mean_and_stderr,
    path_stream,
    sample_bessel_clock,
    sample_bm_exp_functional,
    stieltjes_check,
)
from hwlaw.quadrature import DomainError

SMALL = PathConfig(1.0, 1000, 20000, 5)


@pytest.fixture(scope="module")
def ens():
    return sample_bm_exp_functional(0.0, SMALL)


def test_config_invariants():
    with pytest.raises(DomainError):
        PathConfig(1.0, 99, 1000, 1)
    with pytest.raises(DomainError):
        PathConfig(1.0, 100, 999, 1)
    with pytest.raises(DomainError):
        PathConfig(0.0, 100, 1000, 1)


def test_ensemble_invariants(ens):
    assert ens.terminal_b.shape == ens.functional_a.shape == (SMALL.n_paths,)
    assert np.all(ens.functional_a > 0)
    with pytest.raises(ValueError):
        PathEnsemble(np.zeros(3), np.array([1.0, -1.0, 1.0]), 0.0, SMALL)


def test_mean_of_a(ens):
    m, se = mean_and_stderr(ens.functional_a)
    assert abs(m - (math.e**2 - 1) / 2) <= 3 * se


def test_mean_of_exp_b(ens):
    m, se = mean_and_stderr(np.exp(ens.terminal_b))
    assert abs(m - math.exp(0.5)) <= 3 * se


def test_terminal_b_is_gaussian(ens):
    assert stats.kstest(ens.terminal_b, "norm").statistic < ks_threshold(SMALL.n_paths)


def test_drift_shifts_terminal_b():
    e = sample_bm_exp_functional(1.0, PathConfig(2.0, 200, 4000, 3))
    m, se = mean_and_stderr(e.terminal_b)
    assert abs(m - 2.0) <= 3 * se


def test_determinism_and_thread_independence():
    cfg = PathConfig(1.0, 200, 1500, 99)
    a = sample_bm_exp_functional(0.3, cfg, threads=1)
    b = sample_bm_exp_functional(0.3, cfg, threads=3)
    assert np.array_equal(a.functional_a, b.functional_a)
    assert np.array_equal(a.terminal_b, b.terminal_b)
    c = sample_bm_exp_functional(0.3, PathConfig(1.0, 200, 1500, 100))
    assert not np.array_equal(a.functional_a, c.functional_a)


def test_prefix_stability():
    # path i does not depend on how many paths are drawn
    a = sample_bm_exp_functional(0.0, PathConfig(1.0, 200, 1000, 8))
    b = sample_bm_exp_functional(0.0, PathConfig(1.0, 200, 1300, 8))
    assert np.array_equal(a.functional_a, b.functional_a[:1000])


def test_path_streams_independent():
    x = path_stream(1, 1, 0).standard_normal(5000)
    y = path_stream(1, 1, 1).standard_normal(5000)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.05


def test_step_refinement():
    coarse = sample_bm_exp_functional(0.0, PathConfig(1.0, 500, 20000, 12))
    fine = sample_bm_exp_functional(0.0, PathConfig(1.0, 1000, 20000, 13))
    m1, s1 = mean_and_stderr(coarse.functional_a)
    m2, s2 = mean_and_stderr(fine.functional_a)
    assert abs(m1 - m2) <= 3 * math.hypot(s1, s2)


def test_a_matches_quadrature_cdf(ens):
    stat = ks_statistic(ens.functional_a, lambda v: cdf_a_mu(v, 0.0, 1.0))
    assert stat < ks_threshold(SMALL.n_paths)


def test_time_reversal_symmetry(ens):
    x = np.exp(-2 * ens.terminal_b) * ens.functional_a
    # compare against an independent ensemble so the two samples are independent
    other = sample_bm_exp_functional(0.0, PathConfig(1.0, 1000, 20000, 6))
    assert ks_two_sample(x, other.functional_a) < ks_two_sample_threshold(x.size, other.functional_a.size)


def test_to_csv(tmp_path):
    e = sample_bm_exp_functional(0.0, PathConfig(1.0, 100, 1000, 1))
    path = tmp_path / "e.csv"
    e.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "path_id,terminal_b,functional_a"
    assert len(lines) == 1001
    i, b, a = lines[5].split(",")
    assert int(i) == 4 and float(b) == e.terminal_b[4] and float(a) == e.functional_a[4]


def test_ks_uniform_samples():
    u = np.random.default_rng(3).random(5000)
    assert ks_statistic(u, lambda x: np.clip(x, 0, 1)) < ks_threshold(5000)


def test_ks_constant_samples():
    assert ks_statistic(np.full(100, 0.5), lambda x: np.clip(x, 0, 1)) >= 0.5


@given(st.floats(0.01, 0.99))
def test_ks_single_sample(x1):
    assert ks_statistic([x1], lambda x: np.clip(x, 0, 1)) == pytest.approx(max(1 - x1, x1))


def test_ks_matches_scipy():
    x = np.random.default_rng(4).standard_normal(700)
    assert ks_statistic(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-14)


def test_ks_censored():
    x = np.random.default_rng(5).exponential(size=4000)
    cens = np.where(x < 2.0, x, np.inf)
    f = lambda y: 1 - np.exp(-np.asarray(y))
    stat = ks_statistic(cens, f, upper=2.0)
    assert stat < ks_threshold(4000)
    # without the censoring point the atom at inf reads as a misfit
    assert ks_statistic(cens, f) > 0.1


def test_ks_empty():
    with pytest.raises(DomainError):
        ks_statistic([], lambda x: x)


def test_thresholds():
    assert ks_threshold(10000) == pytest.approx(0.0195)
    assert ks_two_sample_threshold(100, 100) == pytest.approx(1.628 * math.sqrt(0.02), rel=1e-3)


@pytest.mark.parametrize("variant", ["plain", "drifted"])
def test_bougerol(variant):
    r = bougerol_check(1.0, variant, PathConfig(1.0, 1000, 20000, 21))
    assert r.passed


def test_bougerol_power():
    r = bougerol_check(1.0, "plain", PathConfig(1.0, 500, 5000, 21), t_other=2.0)
    assert not r.passed


def test_bougerol_variant():
    with pytest.raises(DomainError):
        bougerol_check(1.0, "other", SMALL)


@pytest.mark.parametrize("n,t,tol", [(1, 1.0, 1e-10), (0, 2.0, 1e-12), (5, 0.5, 1e-8), (-3, 1.0, 1e-10)])
def test_stieltjes(n, t, tol):
    assert stieltjes_check(n, t) <= tol


def test_stieltjes_noninteger_does_not_vanish():
    assert stieltjes_check(0.5, 1.0) > 1e-3


def test_stieltjes_range():
    with pytest.raises(DomainError):
        stieltjes_check(11, 1.0)


def test_clock_nonnegative_nu_all_survive():
    c = sample_bessel_clock(BesselParams(0, 1, 1), PathConfig(1.0, 200, 1000, 2))
    assert c.survived.all() and c.n_undecided == 0
    finite = np.isfinite(c.clock)
    assert np.all(c.clock[finite] > 0)


def test_clock_determinism():
    p, cfg = BesselParams(-1, 1, 1), PathConfig(1.0, 200, 1000, 4)
    a = sample_bessel_clock(p, cfg, threads=1)
    b = sample_bessel_clock(p, cfg, threads=2)
    assert np.array_equal(a.clock, b.clock) and np.array_equal(a.survived, b.survived)


def test_clock_small_time_scaling():
    # for small t the clock is close to t/a^2
    c = sample_bessel_clock(BesselParams(0, 1, 0.01), PathConfig(0.01, 500, 1000, 4))
    assert abs(np.median(c.clock) - 0.01) < 1e-3


def test_clock_to_csv(tmp_path):
    c = sample_bessel_clock(BesselParams(-1, 1, 1), PathConfig(1.0, 100, 1000, 4))
    path = tmp_path / "c.csv"
    c.to_csv(path)
    assert path.read_text().splitlines()[0] == "path_id,clock,survived,terminal_r,undecided"
