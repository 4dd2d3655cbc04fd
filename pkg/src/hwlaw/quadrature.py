"""
Adaptive Gauss-Kronrod quadrature for the three integral shapes used
throughout the package:

    E[f(B_t)]             Gaussian expectation,   expect_gaussian
    int_0^inf g(r) dr     half-line integral,     integrate_halfline
    int_R h(x) dx         whole-line integral,    integrate_line

Integrands are evaluated on numpy arrays of nodes. An integrand may return
an array of shape ``(n,)`` or ``(m, n)``; in the second case the ``m``
integrals share the panel tree and the error norm is the max over rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

__all__ = [
    "QuadratureConfig",
    "IntegralEstimate",
    "DomainError",
    "gauss_kronrod",
    "integrate_interval",
    "expect_gaussian",
    "integrate_halfline",
    "integrate_line",
    "gaussian_truncation",
]

EPS = np.finfo(float).eps

# 21-point Kronrod extension of the 10-point Gauss-Legendre rule.
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600725717188,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full symmetric node set on [-1, 1]
NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
K_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
G_WEIGHTS = np.zeros(21)
G_WEIGHTS[1:10:2] = _WG
G_WEIGHTS[11:20:2] = _WG[::-1]


class DomainError(ValueError):
    """Argument outside the supported domain of an evaluation."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and resolution controls shared by all integrators."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 20000
    truncation_sigma: float = 8.0
    osc_nodes_per_period: int = 16
    t_min: float = 0.05

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0 or self.abs_tol + self.rel_tol <= 0:
            raise DomainError("need abs_tol, rel_tol >= 0 with abs_tol + rel_tol > 0")
        if self.truncation_sigma < 6:
            raise DomainError("truncation_sigma must be >= 6")
        if self.osc_nodes_per_period < 8:
            raise DomainError("osc_nodes_per_period must be >= 8")
        if self.max_subdivisions < 0:
            raise DomainError("max_subdivisions must be >= 0")

    def with_(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)

    def tolerance(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * float(np.max(np.abs(value))))


@dataclass(frozen=True)
class IntegralEstimate:
    value: float | np.ndarray
    abs_error: float
    evaluations: int
    converged: bool

    def __float__(self):
        return float(self.value)

    def scaled(self, factor: float, cfg: QuadratureConfig | None = None) -> "IntegralEstimate":
        """Multiply by a constant; re-judge convergence against ``cfg`` if given."""
        value = self.value * factor
        err = self.abs_error * abs(factor)
        conv = self.converged if cfg is None else err <= cfg.tolerance(value)
        return IntegralEstimate(value, err, self.evaluations, conv)


def gauss_kronrod(f, a: np.ndarray, b: np.ndarray):
    """Apply the G10/K21 pair on every panel [a_i, b_i].

    Returns (kronrod, error, at_floor) with kronrod shaped (m, n_panels);
    ``at_floor`` marks panels whose error estimate is pure rounding.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float)
    y = y.reshape(-1, a.size, 21)
    kron = (y @ K_WEIGHTS) * half
    gauss = (y @ G_WEIGHTS) * half
    resabs = (np.abs(y) @ K_WEIGHTS) * np.abs(half)
    mean = kron / np.where(half == 0, 1.0, 2 * half)
    resasc = (np.abs(y - mean[..., None]) @ K_WEIGHTS) * np.abs(half)
    diff = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(resasc > 0, np.minimum(1.0, (200 * diff / resasc) ** 1.5), 0.0)
    err = np.where(resasc > 0, resasc * scale, diff)
    # rounding floor: the estimate can never beat the integrand's magnitude times eps
    floor = 4 * EPS * resabs
    at_floor = np.all(err <= floor, axis=0)
    err = np.maximum(err, floor)
    return kron, np.max(err, axis=0), at_floor


def integrate_interval(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig,
    n_initial: int = 8,
    breakpoints=None,
) -> IntegralEstimate:
    """Globally adaptive integration of ``f`` over the finite interval [a, b].

    Panels are bisected in batches: every panel whose error exceeds its
    share of the remaining budget is split, until the summed error meets the
    tolerance or ``cfg.max_subdivisions`` panels have been split.
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DomainError("finite interval required")
    if b == a:
        return IntegralEstimate(0.0, 0.0, 0, True)
    if breakpoints is not None:
        edges = np.unique(np.concatenate([[a, b], np.clip(breakpoints, a, b)]))
        sub = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            k = max(1, int(round(n_initial * (hi - lo) / (b - a))))
            sub.append(np.linspace(lo, hi, k + 1))
        edges = np.unique(np.concatenate(sub))
    else:
        edges = np.linspace(a, b, max(1, n_initial) + 1)
    lo, hi = edges[:-1], edges[1:]
    kron, err, floor = gauss_kronrod(f, lo, hi)
    evals = 21 * lo.size
    done_val = np.zeros(kron.shape[0])
    done_err = 0.0
    splits = 0
    while True:
        total = done_val + kron.sum(axis=1)
        total_err = done_err + err.sum()
        tol = cfg.tolerance(total)
        if total_err <= tol or splits >= cfg.max_subdivisions or lo.size == 0:
            break
        share = tol * (hi - lo) / (b - a)
        bad = (err > 0.5 * share) & ~floor
        if not bad.any():
            live = ~floor
            if not live.any():
                break  # nothing left but rounding noise
            bad = live & (err >= np.max(err[live]))
        idx = np.flatnonzero(bad)
        if idx.size == 0:
            break
        if idx.size > cfg.max_subdivisions - splits:
            idx = idx[np.argsort(err[idx])[::-1][: cfg.max_subdivisions - splits]]
            bad = np.zeros_like(bad)
            bad[idx] = True
        keep = ~bad
        done_val = done_val + kron[:, keep].sum(axis=1)
        done_err += err[keep].sum()
        mid = 0.5 * (lo[bad] + hi[bad])
        lo = np.concatenate([lo[bad], mid])
        hi = np.concatenate([mid, hi[bad]])
        splits += int(bad.sum())
        kron, err, floor = gauss_kronrod(f, lo, hi)
        evals += 21 * lo.size
    value = total if total.size > 1 else float(total[0])
    return IntegralEstimate(value, float(total_err), evals, bool(total_err <= tol))


def gaussian_truncation(t: float, growth: float, cfg: QuadratureConfig, bound: float = 1.0) -> float:
    """Half-width L so that int_{|x|>L} C e^{k|x|} e^{-x^2/2t} dx / sqrt(2 pi t) < abs_tol.

    Never narrower than ``truncation_sigma`` standard deviations.
    """
    kt = growth * t
    tol = max(cfg.abs_tol, 1e-300)
    log_ratio = max(math.log(max(bound, 1e-300) / tol), 0.0)
    L = kt + math.sqrt(kt * kt + 2 * t * log_ratio) + 2 * math.sqrt(t)
    return max(L, cfg.truncation_sigma * math.sqrt(t))


def expect_gaussian(
    f: Callable[[np.ndarray], np.ndarray],
    t: float,
    cfg: QuadratureConfig,
    growth: float = 1.0,
    bound: float = 1.0,
    freq: float = 0.0,
    shift: float = 0.0,
    window: float | None = None,
) -> IntegralEstimate:
    """E[f(B_t)] for a standard Brownian motion B.

    Parameters
    ----------
    f : callable
        Vectorized integrand; may return shape (n,) or (m, n).
    growth, bound : float
        Caller-declared envelope |f(x)| <= bound * exp(growth*|x|),
        used to choose the truncation window.
    freq : float
        Largest angular frequency of the integrand near the origin,
        used only to size the initial panels.
    shift : float
        If nonzero, ``f`` must be entire and accept complex input; the
        expectation is then taken as Re int f(z) phi_t(z) dz along
        Im z = shift, with phi_t the Gaussian density continued to C.
        By Cauchy's theorem this equals Re E[f(B_t)] whenever f(z) phi_t(z)
        vanishes at both ends of the strip.
    window : float, optional
        Caller-known half-width beyond which f itself is negligible; the
        truncation is the smaller of this and the Gaussian window.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    L = gaussian_truncation(t, growth, cfg, bound)
    if window is not None:
        L = min(L, window)
    norm = 1.0 / math.sqrt(2 * math.pi * t)

    if shift:
        def weighted(x):
            z = x + 1j * shift
            return np.real(f(z) * (norm * np.exp(-z * z / (2 * t))))
    else:
        def weighted(x):
            return np.real(f(x)) * (norm * np.exp(-x * x / (2 * t)))

    omega = math.pi / t + abs(freq)
    period = 2 * math.pi / omega
    width = 21 * period / cfg.osc_nodes_per_period
    n0 = int(min(max(8, math.ceil(2 * L / width)), 4096))
    return integrate_interval(weighted, -L, L, cfg, n_initial=n0)


def integrate_halfline(
    g: Callable[[np.ndarray], np.ndarray],
    cfg: QuadratureConfig,
    endpoint_exponent: float = 0.0,
    scale: float = 1.0,
    log_map: bool = False,
    n_initial: int = 16,
) -> IntegralEstimate:
    """int_0^inf g(r) dr.

    The half-line is mapped to (0, 1) by r = scale*u/(1-u), or to the real
    line by r = scale*e^s when ``log_map`` is set. ``endpoint_exponent``
    declares g(r) ~ r^p near 0; p <= -1 is rejected as non-integrable.
    """
    if endpoint_exponent <= -1:
        raise DomainError("endpoint exponent <= -1: integral diverges at 0")
    if log_map:
        # r^{p+1} decay at s -> -inf fixes the lower cut; upper cut is e^7 * scale
        lo = max(-700.0, -36.0 / (1.0 + endpoint_exponent))

        def mapped(s):
            r = scale * np.exp(s)
            return g(r) * r

        return integrate_interval(mapped, lo, 7.0, cfg, n_initial=n_initial)

    if endpoint_exponent < 0:
        # u = w^q with q(p+1) > 1 removes the endpoint singularity
        q = 2.0 / (1.0 + endpoint_exponent)
    else:
        q = 1.0

    def mapped_u(w):
        u = w ** q
        du = q * w ** (q - 1) if q != 1.0 else 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r = scale * u / (1 - u)
            jac = scale / (1 - u) ** 2
            val = g(r) * (jac * du)
        return np.where((u < 1) & (u > 0), val, 0.0)

    return integrate_interval(mapped_u, 0.0, 1.0, cfg, n_initial=n_initial)


def integrate_line(
    h: Callable[[np.ndarray], np.ndarray],
    cfg: QuadratureConfig,
    scale: float = 1.0,
    n_initial: int = 16,
) -> IntegralEstimate:
    """int_R h(x) dx, folded onto the half-line as int_0^inf [h(x) + h(-x)] dx."""

    def folded(r):
        return h(r) + h(-r)

    return integrate_halfline(folded, cfg, scale=scale, n_initial=n_initial)
