"""
Laws of the exponential functional A_t^(mu) = int_0^t exp(2(B_s + mu s)) ds.

With c_t = e^{pi^2/8t} and g(r) = E[cosh B cos(r sinh B) cos(pi B/2t)] the
density D(mu, t, v) of A_t^(mu) is written as

    D = (c_t/pi) v^{mu-1} e^{-1/2v - mu^2 t/2} I_mu(v),
    I_mu(v) = int_0^inf r^mu e^{-v r^2/2} g(r) dr,

and I_mu is evaluated in one of three ways:

double   the r-integral itself, with g memoized on the quadrature nodes;
hermite  I_mu = E[cosh B cos(pi B/2t - pi mu/2) h_mu(B)] with
         h_mu = sqrt(pi/(2v)^{mu+1}) e^{-sinh^2 B/2v} H_mu(sinh B/sqrt(2v)),
         valid for mu > -1;
negibp   integration by parts, which brings mu = -3/2 and mu = -2 back to
         Hermite degrees -1/2 and -1.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, erfcinv

from .quadrature import (
    DomainError,
    IntegralEstimate,
    QuadratureConfig,
    expect_gaussian,
    integrate_interval,
)
from .special import hermite_scaled
from .theta import DEFAULT_CFG, contour_shift, g_values, theta_values

__all__ = [
    "T_MAX",
    "ExpFunctionalLaw",
    "NormConstant",
    "GCache",
    "METHODS",
    "joint_density_b_a",
    "joint_density_expb_a",
    "density_a_mu",
    "density_curve",
    "normalization",
    "v_upper",
    "cdf_a_mu",
    "joint_density_ratio_a",
    "laplace_joint_rhs",
    "hermite_indicator_moment_rhs",
    "recip_exp_moment_rhs",
]

METHODS = ("double", "hermite", "negibp")
NEGIBP_MUS = (-1.5, -2.0)
# (0, inf) in v is replaced by this window; the tail mass is estimated separately
V_WINDOW = (1e-4, 50.0)
# probability left above v_upper(); see there
UPPER_TAIL = 1e-8
# P(A_t > 1e12) < 1e-8 for t <= 4 and mu = 0
TAIL_V_MAX = 1e12
# upper end of the r-integral; e^{-v r^2/2} is below 1e-190 there for v >= 0.25
R_MAX = 60.0
# beyond this horizon the growth-2 integrands overflow doubles inside the truncation window
T_MAX = 50.0
# the double integral for mu < -1 loses accuracy once (|mu| - 1) t exceeds this
DOUBLE_NEG_SPAN = 4.0


@dataclass(frozen=True)
class ExpFunctionalLaw:
    mu: float
    t: float
    method: str = "hermite"

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if not self.t > 0:
            raise DomainError("t must be positive")
        if self.t > T_MAX:
            raise DomainError(f"t={self.t} above {T_MAX}")
        if self.method == "double" and self.mu < -1 and (-self.mu - 1) * self.t > DOUBLE_NEG_SPAN:
            raise DomainError(f"the double integral needs (|mu| - 1) t <= {DOUBLE_NEG_SPAN} for mu < -1")
        if self.method == "hermite" and not self.mu > -1:
            raise DomainError("the Hermite form needs mu > -1")
        if self.method == "negibp" and self.mu not in NEGIBP_MUS:
            raise DomainError("integration by parts is implemented for mu in {-3/2, -2}")


@dataclass(frozen=True)
class NormConstant:
    c_mu_t: float
    c_t: float

    @classmethod
    def of(cls, mu: float, t: float) -> "NormConstant":
        c_t = math.exp(math.pi**2 / (8 * t))
        c_mu_t = math.exp(math.pi**2 / (8 * t) - mu * mu * t / 2) / math.sqrt(2 ** (mu + 1) * math.pi)
        return cls(c_mu_t, c_t)


class GCache:
    """Memo of g(r) at fixed t.

    The double-integral method evaluates g on adaptive nodes in log r that
    are the same for every v and mu at a given t, so one cache serves a
    whole density curve.
    """

    def __init__(self, t: float, cfg: QuadratureConfig = DEFAULT_CFG):
        self.t = t
        self.cfg = cfg
        self._store: dict[float, float] = {}
        self._lock = threading.Lock()

    def __call__(self, r: np.ndarray) -> np.ndarray:
        flat = np.asarray(r, float).ravel()
        with self._lock:
            missing = np.array(sorted({x for x in flat.tolist() if x not in self._store}))
        if missing.size:
            vals, _ = g_values(missing, self.t, self.cfg)
            with self._lock:
                self._store.update(zip(missing.tolist(), vals.tolist()))
        with self._lock:
            out = np.array([self._store[x] for x in flat.tolist()])
        return out.reshape(np.shape(r))

    def __len__(self):
        return len(self._store)


def _check_v(v):
    v = np.asarray(v, float)
    if np.any(v <= 0):
        raise DomainError("v must be positive")
    return v


def joint_density_b_a(x, v, t: float, cfg: QuadratureConfig = DEFAULT_CFG):
    """Joint density of (B_t, A_t): (1/v) exp(-(1 + e^{2x})/2v) Theta(e^x/v, t)."""
    x, v = np.broadcast_arrays(np.asarray(x, float), _check_v(v))
    th, _, _ = theta_values((np.exp(x) / v).ravel(), t, cfg=cfg)
    out = np.exp(-(1 + np.exp(2 * x)) / (2 * v)) / v * th.reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def joint_density_expb_a(u, v, t: float, cfg: QuadratureConfig = DEFAULT_CFG):
    """Joint density of (e^{B_t}, A_t): (1/uv) exp(-(1 + u^2)/2v) Theta(u/v, t)."""
    u = np.asarray(u, float)
    if np.any(u <= 0):
        raise DomainError("u must be positive")
    return joint_density_b_a(np.log(u), v, t, cfg) / u


# ---------------------------------------------------------------------------
# the three evaluations of I_mu(v)


def _small_r_cut(mu: float, t: float, tol: float = 1e-15) -> tuple[float, float]:
    """Cut r_c below which r^mu g(r) is dropped, and a bound on the dropped part.

    Uses the small-r envelope Theta(r,t) <~ L/sqrt(2 pi t^3) e^{-L^2/2t},
    L = log(2/r), which sits above the computed Theta on every grid tried.
    """
    c_t = math.exp(math.pi**2 / (8 * t))

    def weight(r):
        L = math.log(2 / r)
        theta_env = L / math.sqrt(2 * math.pi * t**3) * math.exp(-L * L / (2 * t))
        return r**mu * math.pi * theta_env / c_t  # r^{mu+1} g(r), the log-measure integrand

    r = 0.1
    while r > 1e-300 and weight(r) > tol:
        r *= 0.5
    return r, weight(r)


def _i_double(mu: float, v: np.ndarray, t: float, cfg: QuadratureConfig, cache: GCache):
    """I_mu(v) as a quadrature in s = log r over [log r_c, log R_MAX]."""
    r_c, clipped = _small_r_cut(mu, t)
    # a fixed interval keeps the adaptive nodes common to every v; for large t
    # and mu near -1 the mass of r^mu g(r) sits far below 1e-12, so r_c can extend it
    lo, hi = min(math.log(1e-12), math.log(r_c)), math.log(R_MAX)
    vv = v[:, None]

    def f(s):
        r = np.exp(s)
        live = r >= r_c
        out = np.zeros((vv.shape[0], s.size))
        if live.any():
            rl = r[live]
            out[:, live] = rl ** (mu + 1) * np.exp(-0.5 * vv * rl * rl) * cache(rl)
        return out

    est = integrate_interval(f, lo, hi, cfg.with_(max_subdivisions=4000), n_initial=64)
    return np.atleast_1d(est.value), est.abs_error + clipped


def _hermite_rows(mu: float, v: np.ndarray):
    """h_mu(x) / sqrt(pi/(2v)^{mu+1}) as a function returning shape (len(v), len(x)).

    The v-dependent scale is left out so that every row is O(1) and one
    absolute tolerance fits all v.
    """
    s2v = np.sqrt(2 * v)[:, None]

    def h(x):
        y = np.sinh(x)[None, :] / s2v
        return hermite_scaled(mu, y.ravel()).reshape(y.shape)

    return h


def _hermite_scale(mu: float, v: np.ndarray) -> np.ndarray:
    return np.sqrt(math.pi / (2 * v) ** (mu + 1))


def _i_hermite(mu: float, v: np.ndarray, t: float, cfg: QuadratureConfig):
    w = math.pi / (2 * t)
    h = _hermite_rows(mu, v)

    def f(x):
        return np.cosh(x) * np.cos(w * x - 0.5 * math.pi * mu) * h(x)

    est = expect_gaussian(f, t, cfg)
    scale = _hermite_scale(mu, v)
    return scale * np.atleast_1d(est.value), scale * est.abs_error


def _i_negibp(mu: float, v: np.ndarray, t: float, cfg: QuadratureConfig):
    """I_{-3/2} and I_{-2} by one integration by parts in r.

    I_{-3/2} = -2v I_{1/2} + 2 int r^{-1/2} e^{-vr^2/2} g'(r) dr, with g'
               written through the nu = -3 pi/4 shifted form, which gives
               -2 E[cosh B sinh B cos(pi B/2t + 3pi/4) h_{-1/2}(B)];
    I_{-2}   = -v I_0 + int r^{-1} e^{-vr^2/2} g'(r) dr
             = -v I_0 - (pi/2) E[cosh B sinh B cos(pi B/2t) erf(sinh B/sqrt(2v))],
               where erf(X) = 1 - (2/sqrt pi) e^{-X^2} H_{-1}(X).
    """
    w = math.pi / (2 * t)
    if mu == -1.5:
        base, e0 = _i_hermite(0.5, v, t, cfg)
        h = _hermite_rows(-0.5, v)

        def f(x):
            return np.sinh(x) * np.cosh(x) * np.cos(w * x + 0.75 * math.pi) * h(x)

        est = expect_gaussian(f, t, cfg, growth=2.0)
        scale = _hermite_scale(-0.5, v)
        return (-2 * v * base - 2 * scale * np.atleast_1d(est.value),
                2 * v * e0 + 2 * scale * est.abs_error)
    base, e0 = _i_hermite(0.0, v, t, cfg)
    s2v = np.sqrt(2 * v)[:, None]

    def f2(x):
        X = np.sinh(x)[None, :] / s2v
        erf_x = 1 - 2 / math.sqrt(math.pi) * hermite_scaled(-1, X)
        return np.sinh(x) * np.cosh(x) * np.cos(w * x) * erf_x

    est = expect_gaussian(f2, t, cfg, growth=2.0)
    return -v * base - 0.5 * math.pi * np.atleast_1d(est.value), v * e0 + 0.5 * math.pi * est.abs_error


def density_a_mu(v, law: ExpFunctionalLaw, cfg: QuadratureConfig = DEFAULT_CFG, cache: GCache | None = None):
    """Density of A_t^(mu) at v (scalar or array), by the method in ``law``.

    Returns an IntegralEstimate whose ``value`` has the shape of ``v``.
    """
    v = _check_v(v)
    vv = np.atleast_1d(v).ravel()
    mu, t = law.mu, law.t
    if law.method == "double":
        if cache is None or cache.t != t:
            cache = GCache(t, cfg)
        core, err = _i_double(mu, vv, t, cfg, cache)
    elif law.method == "hermite":
        core, err = _i_hermite(mu, vv, t, cfg)
    else:
        core, err = _i_negibp(mu, vv, t, cfg)
    c_t = math.exp(math.pi**2 / (8 * t))
    pref = c_t / math.pi * vv ** (mu - 1) * np.exp(-0.5 / vv - 0.5 * mu * mu * t)
    dens = (pref * core).reshape(v.shape)
    abs_err = float(np.max(pref * np.asarray(err)))
    value = float(dens) if dens.ndim == 0 else dens
    conv = abs_err <= max(1e-6, 1e-6 * float(np.max(np.abs(dens))))
    return IntegralEstimate(value, abs_err, 0, conv)


def density_curve(v_grid, law: ExpFunctionalLaw, cfg: QuadratureConfig = DEFAULT_CFG) -> np.ndarray:
    return np.asarray(density_a_mu(np.asarray(v_grid, float), law, cfg).value, float)


def v_upper(mu: float, t: float, tail: float = UPPER_TAIL) -> float:
    """A level that A_t^(mu) exceeds with probability at most ``tail``.

    A_t^(mu) <= t exp(2 max_s B_s + 2 max(mu, 0) t) and
    P(max_s B_s > m) = erfc(m / sqrt(2t)).
    """
    m = math.sqrt(2 * t) * float(erfcinv(tail))
    return t * math.exp(2 * (m + max(mu, 0.0) * t))


def normalization(law: ExpFunctionalLaw, cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """int_0^inf D(mu, t, v) dv in log v over [1e-4, v_upper].

    Below 1e-4 the density carries e^{-1/2v} < e^{-5000}; the mass above
    ``v_upper`` is at most ``UPPER_TAIL`` and is added to the error.
    """
    cache = GCache(law.t, cfg) if law.method == "double" else None
    lo, hi = V_WINDOW[0], v_upper(law.mu, law.t)

    def f(s):
        v = np.exp(s)
        return np.asarray(density_a_mu(v, law, cfg, cache).value) * v

    outer = cfg.with_(abs_tol=1e-9, rel_tol=1e-9, max_subdivisions=300)
    est = integrate_interval(f, math.log(lo), math.log(hi), outer, n_initial=32)
    return IntegralEstimate(float(est.value), est.abs_error + UPPER_TAIL, est.evaluations, est.converged)


def cdf_a_mu(V, mu: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG):
    """P(A_t^(mu) <= V).

    Closed forms integrate the Hermite density in v:

        mu = 0: c_t E[erfc(cosh B/sqrt(2V)) cos(pi B/2t)]
        mu = 1: c_t e^{-t/2} E[sinh B erfc(cosh B/sqrt(2V)) sin(pi B/2t)]

    Other mu integrate ``density_a_mu`` numerically.
    """
    V = _check_v(V)
    VV = np.atleast_1d(V).ravel()
    w = math.pi / (2 * t)
    c_t = math.exp(math.pi**2 / (8 * t))
    s2V = np.sqrt(2 * VV)[:, None]
    if mu == 0:
        def f(x):
            return erfc(np.cosh(x)[None, :] / s2V) * np.cos(w * x)
        out = c_t * np.atleast_1d(expect_gaussian(f, t, cfg).value)
    elif mu == 1:
        def f(x):
            return np.sinh(x) * erfc(np.cosh(x)[None, :] / s2V) * np.sin(w * x)
        out = c_t * math.exp(-t / 2) * np.atleast_1d(expect_gaussian(f, t, cfg).value)
    else:
        law = ExpFunctionalLaw(mu, t, "hermite" if mu > -1 else ("negibp" if mu in NEGIBP_MUS else "double"))
        out = np.empty_like(VV)
        for i, Vi in enumerate(VV):
            def g(s):
                v = np.exp(s)
                return np.asarray(density_a_mu(v, law, cfg).value) * v
            out[i] = integrate_interval(g, math.log(V_WINDOW[0]), math.log(Vi), cfg.with_(abs_tol=1e-10)).value
    out = out.reshape(V.shape)
    return float(out) if out.ndim == 0 else out


def joint_density_ratio_a(u, v, t: float, cfg: QuadratureConfig = DEFAULT_CFG, cache: GCache | None = None):
    """Joint density of (e^{2B_t}/A_t, A_t) at (u, v):

        c_t e^{-u/2 - 1/2v} g(sqrt(u/v)) / (2 pi sqrt(u v^3)).
    """
    u, v = np.broadcast_arrays(np.asarray(u, float), _check_v(v))
    if np.any(u <= 0):
        raise DomainError("u must be positive")
    rho = np.sqrt(u / v).ravel()
    g = cache(rho) if cache is not None else g_values(rho, t, cfg)[0]
    c_t = math.exp(math.pi**2 / (8 * t))
    out = c_t * np.exp(-u / 2 - 0.5 / v) * g.reshape(u.shape) / (2 * math.pi * np.sqrt(u * v**3))
    return float(out) if out.ndim == 0 else out


def laplace_joint_rhs(lam: float, r: float, t: float, form: str = "sinh", cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """Two closed expressions for E[exp(-lam e^{B_t} - (lam^2 + r^2) A_t/2)].

    sinh     E[e^{-lam cosh B} cos(r sinh B)]
    shifted  c_t E[e^{-r cosh B} cos(pi B/2t + lam sinh B)]

    Both integrands are taken along a line Im z = eta < pi/2 where
    e^{i r sinh z} (resp. e^{i lam sinh z}) is damped.
    """
    if lam < 0 or r < 0:
        raise DomainError("lam and r must be nonnegative")
    eta = min(contour_shift(t), 1.0)
    if form == "sinh":
        def f(z):
            return np.exp(-lam * np.cosh(z) + 1j * r * np.sinh(z))
        return expect_gaussian(f, t, cfg, freq=r, shift=eta if r > 0 else 0.0)
    if form != "shifted":
        raise DomainError(f"unknown form {form!r}")
    w = math.pi / (2 * t)
    c_t = math.exp(math.pi**2 / (8 * t))

    def f(z):
        return np.exp(-r * np.cosh(z) + 1j * (w * z + lam * np.sinh(z)))

    inner = cfg.with_(abs_tol=cfg.abs_tol / c_t)
    return expect_gaussian(f, t, inner, freq=lam, shift=eta).scaled(c_t, cfg)


def _v_integral(core, v_lo: float, v_hi: float, cfg: QuadratureConfig) -> IntegralEstimate:
    """int_{v_lo}^{v_hi} core(v) dv in log v; ``core`` maps a v-array to values.

    ``v_hi = inf`` integrates up to ``V_WINDOW[1]`` and then evaluates the
    remaining tail from the same integrand up to ``v_upper(0, t)``-style
    level 1e12, where A_t for t <= 4 has less than 1e-8 mass; that bound is
    added to the error.
    """
    if not 0 < v_lo < v_hi:
        raise DomainError("need 0 < v_lo < v_hi")

    def f(s):
        v = np.exp(s)
        return core(v) * v

    outer = cfg.with_(abs_tol=1e-10, rel_tol=1e-10, max_subdivisions=300)
    if math.isinf(v_hi):
        body = integrate_interval(f, math.log(v_lo), math.log(V_WINDOW[1]), outer, n_initial=16)
        tail = integrate_interval(f, math.log(V_WINDOW[1]), math.log(TAIL_V_MAX), outer, n_initial=16)
        return IntegralEstimate(float(body.value) + float(tail.value),
                                body.abs_error + tail.abs_error + UPPER_TAIL,
                                body.evaluations + tail.evaluations,
                                body.converged and tail.converged)
    return integrate_interval(f, math.log(v_lo), math.log(v_hi), outer, n_initial=16)


def hermite_indicator_moment_rhs(n: int, v_lo: float, v_hi: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """Closed-form side of E[H_n(-e^{B_t}/sqrt(2 A_t)); v_lo < A_t < v_hi]:

        c_t int dv E[cosh B/sqrt(2 pi v^3) e^{-cosh^2 B/2v}
                     cos(pi B/2t + pi n/2) (sqrt(2/v) sinh B)^n].
    """
    if not 0 <= n <= 6:
        raise DomainError("n must be in 0..6")
    w = math.pi / (2 * t)
    c_t = math.exp(math.pi**2 / (8 * t))

    def core(v):
        vv = v[:, None]

        def f(x):
            ch, sh = np.cosh(x), np.sinh(x)
            return (ch / np.sqrt(2 * math.pi * vv**3) * np.exp(-ch * ch / (2 * vv))
                    * np.cos(w * x + 0.5 * math.pi * n) * (np.sqrt(2 / vv) * sh) ** n)

        return c_t * np.atleast_1d(expect_gaussian(f, t, cfg, growth=1.0 + n).value)

    return _v_integral(core, v_lo, v_hi, cfg)


def recip_exp_moment_rhs(alpha: float, v_lo: float, v_hi: float, t: float, cfg: QuadratureConfig = DEFAULT_CFG) -> IntegralEstimate:
    """Closed-form side of E[exp(-alpha e^{2B_t}/2A_t); v_lo < A_t < v_hi]:

        c_t int dv/sqrt(2 pi v^3) e^{-1/2v}
            E[cosh B cos(pi B/2t) (1+alpha)^{-1/2} e^{-sinh^2 B/(2(1+alpha)v)}].
    """
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    w = math.pi / (2 * t)
    c_t = math.exp(math.pi**2 / (8 * t))
    k = 1.0 + alpha

    def core(v):
        vv = v[:, None]

        def f(x):
            sh = np.sinh(x)
            return np.cosh(x) * np.cos(w * x) * np.exp(-sh * sh / (2 * k * vv))

        e = np.atleast_1d(expect_gaussian(f, t, cfg).value)
        return c_t / np.sqrt(2 * math.pi * v**3) * np.exp(-0.5 / v) * e / math.sqrt(k)

    return _v_integral(core, v_lo, v_hi, cfg)
