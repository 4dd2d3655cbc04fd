"""
The clock int_0^t ds/R_s^2 of a Bessel process R of index nu started at a.

Lamperti's relation a e^{B^(nu)_s} = R_{a^2 A^(nu)_s} turns questions about
the clock into questions about A^(nu), and its density on {t < tau_0} is

    e^{delta u} D(nu + 2, u, t/a^2),   delta = 2(nu + 1),

with D(mu, u, v) the density of A_u^(mu) at v. ``density_clock`` evaluates
the clock density directly as an r-integral of Theta, independently of
that reduction, so the two can be checked against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import erfc

from .expfun import T_MAX, ExpFunctionalLaw, GCache, cdf_a_mu, density_a_mu, v_upper
from .quadrature import DomainError, IntegralEstimate, QuadratureConfig, expect_gaussian, integrate_interval
from .special import BESSEL_X_MAX, bessel_i
from .theta import DEFAULT_CFG, theta_values

__all__ = [
    "BesselParams",
    "DFunction",
    "bessel_transition_density",
    "survival_probability",
    "joint_density_r_clock",
    "density_clock",
    "density_clock_reduced",
    "density_clock_closed",
    "clock_cdf",
    "clock_cdf_interpolant",
    "check_d_relation",
]


@dataclass(frozen=True)
class BesselParams:
    nu: float
    a: float
    t: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("starting point a must be positive")
        if not self.t > 0:
            raise DomainError("t must be positive")

    @property
    def delta(self) -> float:
        return 2 * (self.nu + 1)

    def scaled(self) -> "BesselParams":
        """The same clock law started from 1: (nu, a, t) -> (nu, 1, t/a^2)."""
        return BesselParams(self.nu, 1.0, self.t / self.a**2)


@dataclass(frozen=True)
class DFunction:
    """D(mu, u, v), the density of A_u^(mu) at v."""

    mu: float
    u: float
    v: float

    def __call__(self, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
        return float(density_a_mu(self.v, _law(self.mu, self.u), cfg).value)


def _law(mu: float, u: float) -> ExpFunctionalLaw:
    if mu > -1:
        return ExpFunctionalLaw(mu, u, "hermite")
    if mu in (-1.5, -2.0):
        return ExpFunctionalLaw(mu, u, "negibp")
    return ExpFunctionalLaw(mu, u, "double")


def bessel_transition_density(p: BesselParams, r):
    """Density of R_t at r on {t < tau_0}: (r/t)(r/a)^nu e^{-(a^2+r^2)/2t} I_|nu|(ar/t).

    For nu < 0 the order |nu| is used; the factor (r/a)^nu then carries the
    killing at 0.
    """
    r = np.asarray(r, float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    x = p.a * r / p.t
    if np.any(x > BESSEL_X_MAX):
        raise DomainError(f"a r / t exceeds {BESSEL_X_MAX}")
    out = (r / p.t) * (r / p.a) ** p.nu * np.exp(-(p.a**2 + r * r) / (2 * p.t)) * bessel_i(abs(p.nu), x)
    return float(out) if np.ndim(out) == 0 else out


def survival_probability(p: BesselParams, cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """P(t < tau_0) as the integral of the transition density over r."""
    r_hi = min(p.a + 12 * math.sqrt(p.t), BESSEL_X_MAX * p.t / p.a)
    # beyond r_hi the Gaussian factor e^{-(r-a)^2/2t} is below e^{-72}
    return integrate_interval(lambda r: bessel_transition_density(p, np.maximum(r, 1e-300)), 0.0, r_hi,
                              cfg.with_(abs_tol=1e-12), n_initial=32)


def joint_density_r_clock(p: BesselParams, r, u: float, cfg: QuadratureConfig = DEFAULT_CFG):
    """Joint density of (R_t, clock) on {t < tau_0}:

        (1/(t a^nu)) r^{nu+1} e^{-a^2/2t - r^2/2t - nu^2 u/2} Theta(ar/t, u).
    """
    r = np.asarray(r, float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    th, _, _ = theta_values((p.a * r / p.t).ravel(), u, cfg=cfg)
    out = (r ** (p.nu + 1) / (p.t * p.a**p.nu)
           * np.exp(-p.a**2 / (2 * p.t) - r * r / (2 * p.t) - 0.5 * p.nu**2 * u) * th.reshape(r.shape))
    return float(out) if out.ndim == 0 else out


def density_clock(p: BesselParams, u: float, cfg: QuadratureConfig = DEFAULT_CFG,
                  cache: GCache | None = None) -> IntegralEstimate:
    """Density of the clock at u on {t < tau_0}, as an integral over r.

    With Theta(rho, u) = (rho/pi) c_u g(rho), rho = a r/t, the integrand is
    r^{nu+2} e^{-r^2/2t} g(a r/t); it is integrated in log r, where
    r^{nu+2} g vanishes at 0 for nu >= -2 by the flatness of g.
    """
    if u < cfg.t_min:
        raise DomainError(f"u={u} below t_min={cfg.t_min}")
    if p.nu < -2:
        raise DomainError("density_clock supports nu >= -2")
    if cache is None or cache.t != u:
        cache = GCache(u, cfg)
    k = p.a / p.t
    c_u = math.exp(math.pi**2 / (8 * u))
    pref = (k * c_u / math.pi) / (p.t * p.a**p.nu) * math.exp(-p.a**2 / (2 * p.t) - 0.5 * p.nu**2 * u)
    lo = math.log(1e-10 * math.sqrt(p.t))
    hi = math.log(math.sqrt(2 * p.t * 60.0))

    def f(s):
        r = np.exp(s)
        return r ** (p.nu + 3) * np.exp(-r * r / (2 * p.t)) * cache(k * r)

    est = integrate_interval(f, lo, hi, cfg.with_(abs_tol=cfg.abs_tol / pref, max_subdivisions=2000), n_initial=48)
    return est.scaled(pref, cfg)


def density_clock_reduced(p: BesselParams, u: float, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """e^{delta u} D(nu + 2, u, t/a^2)."""
    return math.exp(p.delta * u) * DFunction(p.nu + 2, u, p.t / p.a**2)(cfg)


def density_clock_closed(p: BesselParams, u: float, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """Single-expectation clock densities for nu = -2 and nu = -1.

    nu = -2: e^{pi^2/8u - 2u} E[a^3 cosh B/sqrt(2 pi t^3) e^{-a^2 cosh^2 B/2t} cos(pi B/2u)]
    nu = -1: e^{pi^2/8u - u/2} E[a^3 sinh 2B/sqrt(8 pi t^3) e^{-a^2 cosh^2 B/2t} sin(pi B/2u)]
    """
    a, t = p.a, p.t
    w = math.pi / (2 * u)
    if p.nu == -2:
        pref = math.exp(math.pi**2 / (8 * u) - 2 * u) * a**3 / math.sqrt(2 * math.pi * t**3)

        def f(x):
            ch = np.cosh(x)
            return ch * np.exp(-a * a * ch * ch / (2 * t)) * np.cos(w * x)
    elif p.nu == -1:
        pref = math.exp(math.pi**2 / (8 * u) - u / 2) * a**3 / math.sqrt(8 * math.pi * t**3)

        def f(x):
            ch = np.cosh(x)
            return np.sinh(2 * x) * np.exp(-a * a * ch * ch / (2 * t)) * np.sin(w * x)
    else:
        raise DomainError("closed forms exist here for nu in {-2, -1}")
    return pref * float(expect_gaussian(f, u, cfg, growth=2.0).value)


def clock_cdf(p: BesselParams, u, cfg: QuadratureConfig = DEFAULT_CFG):
    """P(clock <= u, t < tau_0) = P(a^2 A_u^(nu) >= t).

    nu = 0 and nu = 1 use the erfc closed forms of the A-law CDF; other nu
    integrate the A-density above t/a^2. Valid for u <= T_MAX.
    """
    u = np.atleast_1d(np.asarray(u, float))
    if np.any(u > T_MAX):
        raise DomainError(f"clock CDF is available for u <= {T_MAX}")
    v = p.t / p.a**2
    out = np.empty_like(u)
    for i, ui in enumerate(u):
        # P(A_u >= v) <= P(max_s B_s >= log(v/u)/2 - max(nu, 0) u); below 1e-10 the
        # density there is rounding noise scaled by e^{pi^2/8u}, so the bound stands in
        m = 0.5 * math.log(v / ui) - max(p.nu, 0.0) * ui
        if m > 0 and erfc(m / math.sqrt(2 * ui)) < 1e-10:
            out[i] = 0.0
        elif p.nu in (0, 1):
            out[i] = 1.0 - cdf_a_mu(v, p.nu, float(ui), cfg)
        else:
            law = _law(p.nu + 0.0, float(ui))
            hi = v_upper(max(p.nu, 0.0), float(ui))

            def g(s, law=law):
                vv = np.exp(s)
                return np.asarray(density_a_mu(vv, law, cfg).value) * vv

            out[i] = integrate_interval(g, math.log(v), math.log(max(hi, 2 * v)), cfg.with_(abs_tol=1e-10, max_subdivisions=500)).value
    return float(out[0]) if out.size == 1 else out


def clock_cdf_interpolant(p: BesselParams, u_max: float, n: int = 200,
                          cfg: QuadratureConfig = DEFAULT_CFG, conditional: bool = False):
    """Monotone interpolant of ``clock_cdf`` on [t_min, u_max], 0 below t_min.

    At u = inf the callable returns the total mass P(t < tau_0), which is 1
    for nu >= 0; finite u beyond u_max get the value at u_max. With
    ``conditional`` the CDF is divided by the total mass, giving the law of
    the clock given survival. ``u_max`` is capped at T_MAX; use
    ``min(horizon, T_MAX)`` as the censoring point when comparing with samples.
    """
    u_max = min(u_max, T_MAX)
    grid = np.geomspace(cfg.t_min, u_max, n)
    vals = np.maximum.accumulate(np.clip(np.asarray(clock_cdf(p, grid, cfg)), 0.0, 1.0))
    total = 1.0 if p.nu >= 0 else float(survival_probability(p, cfg).value)
    if conditional:
        vals = vals / total
        total = 1.0
    spline = PchipInterpolator(np.log(grid), vals, extrapolate=False)

    def cdf(x):
        x = np.asarray(x, float)
        out = np.where(x >= u_max, vals[-1], 0.0)
        out = np.where(np.isinf(x), total, out)
        mid = (x >= cfg.t_min) & (x < u_max)
        out[mid] = spline(np.log(x[mid]))
        return out

    return cdf


def check_d_relation(nu: float, u: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG) -> dict:
    """int_0^u e^{delta s} D(nu+2, s, t) ds against int_t^inf D(nu, u, v) dv.

    The left side is integrated over [t_min, u]; the clipped part is
    bounded by t_min e^{delta t_min} D(nu+2, t_min, t) and reported.
    """
    if u < cfg.t_min:
        raise DomainError(f"u={u} below t_min={cfg.t_min}")
    delta = 2 * (nu + 1)
    t0 = cfg.t_min

    def lhs_f(s):
        return np.array([math.exp(delta * si) * DFunction(nu + 2, float(si), t)(cfg) for si in s])

    outer = cfg.with_(abs_tol=1e-9, rel_tol=1e-8, max_subdivisions=200)
    lhs = integrate_interval(lhs_f, t0, u, outer, n_initial=4)
    clipped = t0 * math.exp(delta * t0) * abs(DFunction(nu + 2, t0, t)(cfg))
    law = _law(nu, u)
    hi = v_upper(max(nu, 0.0), u)

    def rhs_f(s):
        v = np.exp(s)
        return np.asarray(density_a_mu(v, law, cfg).value) * v

    rhs = integrate_interval(rhs_f, math.log(t), math.log(max(hi, 2 * t)), outer, n_initial=16)
    lv, rv = float(lhs.value), float(rhs.value)
    return {"lhs": lv, "rhs": rv, "residual": abs(lv - rv), "clipped": clipped,
            "abs_error": lhs.abs_error + rhs.abs_error}
