"""Scalar special functions: Gamma, erf, I_nu by its power series, and the
real-degree Hermite function H_mu (mu >= -1)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sc

from .quadrature import DomainError

__all__ = [
    "HermiteOrder",
    "gamma_fn",
    "erf_fn",
    "bessel_i",
    "hermite_h",
    "hermite_scaled",
    "hermite_integral",
    "BESSEL_X_MAX",
]

BESSEL_X_MAX = 30.0

# |y| where the scaled Hermite integral switches from the real axis to the rotated ray
_RAY_SWITCH = 3.0
_LAGUERRE_NODES = 80


@dataclass(frozen=True)
class HermiteOrder:
    mu: float

    def __post_init__(self):
        if not self.mu >= -1:
            raise DomainError(f"Hermite degree must be >= -1, got {self.mu}")

    @property
    def is_integer(self) -> bool:
        return self.mu >= 0 and float(self.mu).is_integer()


def gamma_fn(x):
    """Euler Gamma on x > 0."""
    xa = np.asarray(x, float)
    if np.any(xa <= 0):
        raise DomainError("gamma_fn is only supported for x > 0")
    out = sc.gamma(xa)
    return float(out) if np.ndim(out) == 0 else out


def erf_fn(x):
    out = sc.erf(np.asarray(x, float))
    return float(out) if np.ndim(out) == 0 else out


def bessel_i(nu: float, x):
    """Modified Bessel function I_nu(x), nu >= 0, 0 <= x <= 30, by its ascending series.

    Terms are accumulated until the next one falls below 1e-17 of the
    partial sum.
    """
    if nu < 0:
        raise DomainError("bessel_i needs nu >= 0")
    xa = np.asarray(x, float)
    if np.any(xa < 0) or np.any(xa > BESSEL_X_MAX):
        raise DomainError(f"bessel_i supports 0 <= x <= {BESSEL_X_MAX}")
    half = 0.5 * xa
    q = half * half
    term = half**nu / math.gamma(nu + 1)
    total = term.copy()
    k = 0
    while True:
        k += 1
        term = term * q / (k * (nu + k))
        total = total + term
        if np.all(term <= 1e-17 * np.abs(total)) or k > 500:
            break
    return float(total) if np.ndim(total) == 0 else total


@lru_cache(maxsize=64)
def _laguerre(n: int, alpha: float):
    return sc.roots_genlaguerre(n, alpha)


def hermite_scaled(mu: float, y):
    """e^{-y^2} H_mu(y) for real mu >= -1, vectorized in y.

    Integer degrees use the recurrence and mu = -1 the erfc form; other
    degrees go through ``_scaled_integral``.
    """
    HermiteOrder(mu)
    y = np.asarray(y, float)
    if mu == -1:
        return 0.5 * math.sqrt(math.pi) * sc.erfc(y)
    if float(mu).is_integer():
        return _hermite_poly(int(mu), y) * np.exp(-y * y)
    return _scaled_integral(mu, y)


def _scaled_integral(mu: float, y: np.ndarray) -> np.ndarray:
    """e^{-y^2} H_mu(y) from

        e^{-y^2} H_mu(y) = 2^{mu+1}/sqrt(pi) int_0^inf s^mu e^{-s^2} cos(2ys - pi mu/2) ds.

    For |y| <= 3 the substitution s^2 = tau turns this into two generalized
    Gauss-Laguerre sums with smooth integrands. For y < -3 the contour is
    rotated to arg s = -pi/4, where the integrand decays like
    e^{-sqrt(2)|y| s}. For y > 3 the integral is an exponentially small
    remainder of cancelling power-law terms, so it is taken instead from
    the parabolic cylinder function: e^{-y^2} H_mu(y) = 2^{mu/2} e^{-y^2/2} D_mu(sqrt(2) y).
    """
    y = np.atleast_1d(y)
    out = np.empty_like(y)
    small = np.abs(y) <= _RAY_SWITCH
    neg = y < -_RAY_SWITCH
    pos = y > _RAY_SWITCH
    if small.any():
        out[small] = _scaled_real_axis(mu, y[small])
    if neg.any():
        out[neg] = _scaled_ray(mu, y[neg])
    if pos.any():
        # beyond y = 40 the scaled value is below e^{-1500} (2y)^mu and flushes to zero
        live = pos & (y <= 40.0)
        out[pos & ~live] = 0.0
        yp = y[live]
        d, _ = sc.pbdv(mu, math.sqrt(2) * yp)
        out[live] = 2 ** (mu / 2) * np.exp(-0.5 * yp * yp) * d
    return out


def hermite_integral(mu: float, x):
    """H_mu(x) from the integral representation for any mu > -1, integers included.

    The recurrence and the erfc form are not consulted; this exists to
    cross-check them. Limited to |x| <= 8.
    """
    order = HermiteOrder(float(mu))
    if order.mu == -1:
        raise DomainError("the integral representation needs mu > -1")
    xa = np.asarray(x, float)
    if np.any(np.abs(xa) > 8):
        raise DomainError("the integral representation is used for |x| <= 8")
    out = _scaled_integral(order.mu, np.atleast_1d(xa)).reshape(xa.shape) * np.exp(xa * xa)
    return float(out) if np.ndim(out) == 0 else out


def _scaled_real_axis(mu, y):
    c = 0.5 * math.pi * mu
    a1 = 0.5 * (mu - 1)
    x1, w1 = _laguerre(_LAGUERRE_NODES, a1)
    x2, w2 = _laguerre(_LAGUERRE_NODES, a1 + 0.5)
    r1, r2 = np.sqrt(x1), np.sqrt(x2)
    yy = y[:, None]
    cos_part = np.cos(2 * yy * r1) @ w1
    # sin(2 y sqrt(tau)) / sqrt(tau), written through sinc to stay finite at y = 0
    sin_part = (2 * yy * np.sinc(2 * yy * r2 / math.pi)) @ w2
    integral = 0.5 * (math.cos(c) * cos_part + math.sin(c) * sin_part)
    return 2 ** (mu + 1) / math.sqrt(math.pi) * integral


def _scaled_ray(mu, y):
    kap = math.sqrt(2) * np.abs(y)
    x, w = _laguerre(_LAGUERRE_NODES, mu)
    phase = np.exp(1j * (x[None, :] - x[None, :] ** 2 / kap[:, None] ** 2)) @ w
    J = np.exp(0.25j * math.pi * (mu + 1)) * kap ** (-mu - 1) * phase
    J = np.where(y < 0, np.conj(J), J)
    integral = np.real(np.exp(-0.5j * math.pi * mu) * J)
    return 2 ** (mu + 1) / math.sqrt(math.pi) * integral


def _hermite_poly(n: int, x):
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = 2 * x
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h


def hermite_h(mu, x):
    """Hermite function H_mu(x) of real degree mu >= -1.

    Integer degrees use the three-term recurrence, mu = -1 uses
    H_{-1}(x) = e^{x^2} int_x^inf e^{-y^2} dy, and other degrees the
    integral representation (limited to |x| <= 8, where e^{x^2} is still
    harmless).
    """
    order = mu if isinstance(mu, HermiteOrder) else HermiteOrder(float(mu))
    xa = np.asarray(x, float)
    if order.is_integer:
        out = _hermite_poly(int(order.mu), xa)
    elif order.mu == -1:
        out = 0.5 * math.sqrt(math.pi) * sc.erfcx(xa)
    else:
        return hermite_integral(order.mu, xa)
    return float(out) if np.ndim(out) == 0 else out
