"""
The Hartman-Watson function Theta(r, t), defined through

    int_0^inf exp(-lambda^2 t / 2) Theta(r, t) dt = I_|lambda|(r).

Every representation evaluated here is a single Gaussian expectation
E[F(B_t)] times an explicit prefactor:

    yor       (r/2pi) e^{pi^2/2t} E[e^{-r cosh B} sinh B sin(pi B/t)]
    coscos    (r/pi)  e^{pi^2/8t} E[cosh B cos(r sinh B) cos(pi B/2t)]
    sinsin    (r/pi)  e^{pi^2/8t} E[cosh B sin(r sinh B) sin(pi B/2t)]
    averaged  (r/2pi) e^{pi^2/8t} E[cosh B cos(r sinh B - pi B/2t)]
    shifted   (r/pi)  e^{pi^2/8t} E[cosh B cos(r sinh B - nu) cos(pi B/2t - nu)]

The e^{pi^2/8t} forms lose far fewer digits to cancellation at small t,
so ``coscos`` is the default. Yor's form is kept for cross-checks and
for large t, where cosh B_t makes the other forms useless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, gammaincc, k0

from .quadrature import (
    DomainError,
    IntegralEstimate,
    QuadratureConfig,
    expect_gaussian,
    integrate_halfline,
    integrate_interval,
)
from .special import bessel_i

__all__ = [
    "ThetaRep",
    "ThetaPoint",
    "YOR",
    "COSCOS",
    "SINSIN",
    "AVERAGED",
    "shifted",
    "ALL_REPS",
    "theta",
    "theta_values",
    "theta_g",
    "g_values",
    "g_derivative",
    "vanishing_companion",
    "check_laplace_r",
    "check_laplace_t",
    "LaplaceTCheck",
    "theta_normalized",
    "DEFAULT_CFG",
    "YOR_T_MIN",
    "contour_shift",
]

DEFAULT_CFG = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-11)
YOR_T_MIN = 0.25
_R_CHUNK = 48


@dataclass(frozen=True)
class ThetaRep:
    variant: str
    nu: float = 0.0

    def __post_init__(self):
        if self.variant not in ("yor", "coscos", "sinsin", "averaged", "shifted"):
            raise DomainError(f"unknown representation {self.variant!r}")

    @property
    def label(self) -> str:
        return f"shifted({self.nu:g})" if self.variant == "shifted" else self.variant


YOR = ThetaRep("yor")
COSCOS = ThetaRep("coscos")
SINSIN = ThetaRep("sinsin")
AVERAGED = ThetaRep("averaged")


def shifted(nu: float) -> ThetaRep:
    return ThetaRep("shifted", float(nu))


ALL_REPS = (YOR, COSCOS, SINSIN, AVERAGED)


@dataclass(frozen=True)
class ThetaPoint:
    r: float
    t: float

    def validate(self, cfg: QuadratureConfig):
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if not self.t >= cfg.t_min:
            raise DomainError(f"t={self.t} below t_min={cfg.t_min}")


def contour_shift(t: float, digits: float = 2.0) -> float:
    """Height of the shifted integration line for e^{+i r sinh z} integrands.

    Moving to Im z = eta damps e^{i r sinh z} by e^{-r cosh(xi) sin(eta)},
    while the Gaussian and cos(pi z/2t) grow by at most
    exp(eta^2/2t + pi eta/2t). eta is the largest value keeping that growth
    below 10**digits, capped at pi/2.
    """
    budget = digits * math.log(10.0) * 2 * t
    # eta^2 + pi*eta - budget = 0
    eta = 0.5 * (-math.pi + math.sqrt(math.pi**2 + 4 * budget))
    return min(eta, 0.5 * math.pi)


def _integrand(rep: ThetaRep, r: np.ndarray, t: float):
    """Return (F, prefactor/r, shift) for a representation.

    F accepts complex z and returns shape (len(r), len(z)); its real part on
    the real axis is the representation's integrand.
    """
    w = math.pi / (2 * t)
    r = r[:, None]
    if rep.variant == "yor":
        def F(x):
            return np.exp(-r * np.cosh(x)) * (np.sinh(x) * np.sin(2 * w * x))
        return F, math.exp(math.pi**2 / (2 * t)) / (2 * math.pi), 0.0
    c8 = math.exp(math.pi**2 / (8 * t)) / math.pi
    eta = contour_shift(t)
    if rep.variant == "coscos":
        def F(z):
            return np.cosh(z) * np.exp(1j * r * np.sinh(z)) * np.cos(w * z)
        return F, c8, eta
    if rep.variant == "sinsin":
        def F(z):
            return -1j * np.cosh(z) * np.exp(1j * r * np.sinh(z)) * np.sin(w * z)
        return F, c8, eta
    if rep.variant == "averaged":
        def F(z):
            return np.cosh(z) * np.exp(1j * (r * np.sinh(z) - w * z))
        return F, c8 / 2, eta
    nu = rep.nu

    def F(z):
        return np.cosh(z) * np.exp(1j * (r * np.sinh(z) - nu)) * np.cos(w * z - nu)
    return F, c8, eta


def yor_window(r: float, tol: float) -> float:
    """Half-width beyond which e^{-r cosh x} sinh x is below ``tol``."""
    target = math.log(1.0 / tol)
    x = 1.0
    for _ in range(60):
        x = math.acosh(max(1.0, (target + x) / r))
    return x + 0.5


def _expect_rows(F, t, cfg, n_rows, shift, growth=1.0, freq=0.0):
    est = expect_gaussian(F, t, cfg, growth=growth, freq=freq, shift=shift)
    val = np.asarray(est.value, float).reshape(n_rows)
    return val, est


def theta_values(r, t: float, rep: ThetaRep = COSCOS, cfg: QuadratureConfig = DEFAULT_CFG):
    """Theta(r_i, t) for an array of r, with a per-batch error bound.

    Returns (values, abs_errors, converged) arrays.
    """
    r = np.atleast_1d(np.asarray(r, float))
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    if t < cfg.t_min:
        raise DomainError(f"t={t} below t_min={cfg.t_min}")
    if rep.variant == "yor" and t < YOR_T_MIN:
        raise DomainError(f"Yor's representation is restricted to t >= {YOR_T_MIN}")
    vals = np.empty_like(r)
    errs = np.empty_like(r)
    conv = np.empty(r.shape, bool)
    for lo in range(0, r.size, _R_CHUNK):
        sl = slice(lo, min(lo + _R_CHUNK, r.size))
        vals[sl], errs[sl], conv[sl] = _theta_batch(rep, r[sl], t, cfg)
        if sl.stop - sl.start > 1:
            # the batch error is shared by all rows; retry flagged rows on their own
            for i in np.flatnonzero(~conv[sl]) + lo:
                vals[i], errs[i], conv[i] = (a[0] for a in _theta_batch(rep, r[i:i + 1], t, cfg))
    return vals, errs, conv


def _theta_batch(rep: ThetaRep, rr: np.ndarray, t: float, cfg: QuadratureConfig):
    F, pref, eta = _integrand(rep, rr, t)
    big = float(rr.max())
    # tolerance on Theta translates to a tolerance on the expectation
    inner = cfg.with_(abs_tol=cfg.abs_tol / (pref * big))
    v, est = _expect_rows(F, t, inner, rr.size, eta, freq=big)
    vals = pref * rr * v
    errs = pref * rr * est.abs_error
    return vals, errs, errs <= np.maximum(cfg.abs_tol, cfg.rel_tol * np.abs(vals))


def theta(p: ThetaPoint | tuple, rep: ThetaRep = COSCOS, cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """Theta(r, t) through one of the five representations."""
    p = p if isinstance(p, ThetaPoint) else ThetaPoint(*p)
    p.validate(cfg)
    if rep.variant == "yor" and p.t < YOR_T_MIN:
        raise DomainError(f"Yor's representation is restricted to t >= {YOR_T_MIN}")
    F, pref, eta = _integrand(rep, np.array([p.r]), p.t)
    scale = pref * p.r
    inner = cfg.with_(abs_tol=cfg.abs_tol / scale)
    est = expect_gaussian(F, p.t, inner, freq=p.r, shift=eta)
    value = float(np.ravel(est.value)[0])
    return IntegralEstimate(value, est.abs_error, est.evaluations, True).scaled(scale, cfg)


def g_values(r, t: float, cfg: QuadratureConfig = DEFAULT_CFG, form: str = "cos"):
    """g(r) = E[cosh B cos(r sinh B) cos(pi B/2t)] for an array of r.

    ``form="sin"`` evaluates the equal expectation E[cosh B sin(r sinh B) sin(pi B/2t)].
    Returns (values, abs_errors).
    """
    r = np.atleast_1d(np.asarray(r, float))
    if t < cfg.t_min:
        raise DomainError(f"t={t} below t_min={cfg.t_min}")
    rep = COSCOS if form == "cos" else SINSIN
    vals = np.empty_like(r)
    errs = np.empty_like(r)
    for lo in range(0, r.size, _R_CHUNK):
        rr = r[lo:lo + _R_CHUNK]
        F, _, eta = _integrand(rep, rr, t)
        v, est = _expect_rows(F, t, cfg, rr.size, eta, freq=float(np.max(np.abs(rr))))
        vals[lo:lo + rr.size] = v
        errs[lo:lo + rr.size] = est.abs_error
    return vals, errs


def theta_g(r: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG, form: str = "cos") -> float:
    if not r > 0:
        raise DomainError("r must be positive")
    return float(g_values([r], t, cfg, form)[0][0])


def g_derivative(n: int, r: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """n-th derivative of g at r, from the differentiated representations

        g^(2m)(r)   = (-1)^m     E[cosh B sinh^{2m} B   sin(r sinh B) sin(pi B/2t)]
        g^(2m+1)(r) = (-1)^{m+1} E[cosh B sinh^{2m+1} B sin(r sinh B) cos(pi B/2t)]
    """
    if not 0 <= n <= 6:
        raise DomainError("derivative order must be in 0..6")
    if not r > 0:
        raise DomainError("r must be positive")
    if t < cfg.t_min:
        raise DomainError(f"t={t} below t_min={cfg.t_min}")
    w = math.pi / (2 * t)
    m, odd = divmod(n, 2)
    sign = (-1) ** (m + 1) if odd else (-1) ** m
    trig = np.cos if odd else np.sin

    def F(z):
        s = np.sinh(z)
        return -1j * sign * np.cosh(z) * s**n * np.exp(1j * r * s) * trig(w * z)

    return expect_gaussian(F, t, cfg, growth=1.0 + n, freq=r, shift=contour_shift(t))


def vanishing_companion(r: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """E[cosh B cos(r sinh B + pi B/2t)], which is identically zero."""
    w = math.pi / (2 * t)

    def F(z):
        return np.cosh(z) * np.exp(1j * (r * np.sinh(z) + w * z))

    return expect_gaussian(F, t, cfg, freq=r, shift=contour_shift(t))


def check_laplace_r(x: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG) -> dict:
    """int_0^inf (dr/r) e^{-r cosh x} Theta(r, t) against e^{-x^2/2t}/sqrt(2 pi t).

    Theta(r,t)/r = (1/pi) e^{pi^2/8t} g(r), so the left side is a half-line
    integral of g with g evaluated in batches on the quadrature nodes.
    """
    if t < cfg.t_min:
        raise DomainError(f"t={t} below t_min={cfg.t_min}")
    ch = math.cosh(x)
    pref = math.exp(math.pi**2 / (8 * t)) / math.pi

    def integrand(r):
        g, _ = g_values(np.where(r > 0, r, 1e-300), t, cfg)
        return np.exp(-r * ch) * g

    outer = cfg.with_(abs_tol=cfg.abs_tol / pref, max_subdivisions=400)
    est = integrate_halfline(integrand, outer, scale=2.0 / ch)
    lhs = pref * est.value
    rhs = math.exp(-x * x / (2 * t)) / math.sqrt(2 * math.pi * t)
    return {"lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs),
            "abs_error": pref * est.abs_error, "converged": est.converged}


@dataclass(frozen=True)
class LaplaceTCheck:
    lhs: float
    rhs: float
    residual: float
    small_t_mass: float
    tail_mass: float
    abs_error: float


def _theta_any_t(r: float, ts: np.ndarray, cfg: QuadratureConfig, switch: float = 1.0) -> np.ndarray:
    """Theta(r, t) on a grid of t, using coscos for t < switch and Yor above."""
    out = np.empty_like(ts)
    for i, t in enumerate(ts):
        rep = COSCOS if t < switch else YOR
        F, pref, eta = _integrand(rep, np.array([r]), t)
        inner = cfg.with_(abs_tol=cfg.abs_tol / (pref * r))
        window = yor_window(r, inner.abs_tol * 1e-3) if rep is YOR else None
        est = expect_gaussian(F, t, inner, freq=r, shift=eta, window=window)
        out[i] = pref * r * float(np.ravel(est.value)[0])
    return out


def _small_t_mass(r: float, t0: float, cfg: QuadratureConfig) -> float:
    """Estimate of int_0^t0 Theta(r, t) dt.

    Near t0 the computed Theta is dominated by rounding in e^{pi^2/8t}, so
    log Theta = A - c/t is fitted at 4 t0 and 5 t0, where it is resolved,
    and extrapolated: int_0^t0 e^{A - c/t} dt <= e^{A - c/t0} t0^2 / c.
    Falls back to t0 * Theta(r, 4 t0) if the fit is not decaying.
    """
    t1, t2 = 4 * t0, 5 * t0
    th = _theta_any_t(r, np.array([t1, t2]), cfg)
    if th[0] <= 0 or th[1] <= th[0]:
        return t0 * abs(th[0])
    c = math.log(th[1] / th[0]) / (1 / t1 - 1 / t2)
    at_t0 = th[0] * math.exp(-c * (1 / t0 - 1 / t1))
    return at_t0 * t0 * t0 / c


def check_laplace_t(
    r: float, lam: float, cfg: QuadratureConfig = DEFAULT_CFG, t_max: float | None = None
) -> LaplaceTCheck:
    """int_0^inf e^{-lambda^2 t/2} Theta(r, t) dt against I_|lambda|(r).

    The t-integral runs over [t_min, T] in the variable s = log t.
    Beyond T the large-t behaviour Theta(r,t) ~ K_0(r) t^{-3/2}/sqrt(2 pi)
    is integrated in closed form; the mass below t_min is estimated by
    ``_small_t_mass`` and reported, not added.
    """
    if not 0 < r <= 10:
        raise DomainError("check_laplace_t supports 0 < r <= 10")
    lam = abs(lam)
    if t_max is None:
        t_max = max(40.0, 40.0 / lam**2) if lam > 0 else 1e8
    t0 = cfg.t_min
    outer = cfg.with_(abs_tol=1e-9, rel_tol=1e-9, max_subdivisions=200)
    inner = cfg.with_(abs_tol=1e-12, rel_tol=1e-10)

    def integrand(s):
        ts = np.exp(s)
        return _theta_any_t(r, ts, inner) * np.exp(-0.5 * lam * lam * ts) * ts

    est = integrate_interval(integrand, math.log(t0), math.log(t_max), outer, n_initial=12)
    c = k0(r) / math.sqrt(2 * math.pi)
    if lam > 0:
        # int_T^inf c t^{-3/2} e^{-a t} dt, a = lam^2/2
        a = 0.5 * lam * lam
        tail = c * (2 * math.exp(-a * t_max) / math.sqrt(t_max)
                    - 2 * math.sqrt(a) * gamma(0.5) * gammaincc(0.5, a * t_max))
    else:
        tail = 2 * c / math.sqrt(t_max)
    small = _small_t_mass(r, t0, inner)
    lhs = float(est.value) + tail
    rhs = float(bessel_i(lam, r))
    return LaplaceTCheck(lhs, rhs, abs(lhs - rhs), small, tail, est.abs_error)


def theta_normalized(p: ThetaPoint | tuple, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """Theta(r,t)/I_0(r), a probability density in t."""
    p = p if isinstance(p, ThetaPoint) else ThetaPoint(*p)
    return float(theta(p, COSCOS, cfg).value) / float(bessel_i(0.0, p.r))
