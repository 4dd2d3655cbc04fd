"""
Monte Carlo ground truth for the quadrature side.

Every path draws from its own Philox stream keyed by (seed, purpose, path
index), so results do not depend on chunking or on the number of worker
threads.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import gammainc

from .bessel import BesselParams
from .quadrature import DomainError, QuadratureConfig, expect_gaussian

__all__ = [
    "PathConfig",
    "PathEnsemble",
    "ClockEnsemble",
    "BougerolResult",
    "path_stream",
    "num_threads",
    "sample_bm_exp_functional",
    "sample_terminal_bm",
    "sample_bessel_clock",
    "ks_statistic",
    "ks_two_sample",
    "ks_threshold",
    "ks_two_sample_threshold",
    "bougerol_check",
    "stieltjes_check",
    "mean_and_stderr",
]

# stream purposes; part of the key so that independent draws never share bits
TAG_PATH = 1
TAG_NORMAL = 2
TAG_TERMINAL = 3
TAG_SIGN = 4
TAG_CLOCK = 5

CHUNK = 256
# KS critical value coefficients: one-sample 95%, two-sample 99%
KS_ONE_SAMPLE = 1.95
KS_TWO_SAMPLE_99 = 1.628


@dataclass(frozen=True)
class PathConfig:
    t: float
    n_steps: int = 10_000
    n_paths: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("t must be positive")
        if self.n_steps < 100:
            raise DomainError("n_steps must be at least 100")
        if self.n_paths < 1000:
            raise DomainError("n_paths must be at least 1000")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass
class PathEnsemble:
    terminal_b: np.ndarray
    functional_a: np.ndarray
    mu: float
    config: PathConfig

    def __post_init__(self):
        if self.terminal_b.shape != self.functional_a.shape:
            raise ValueError("terminal_b and functional_a must have equal length")
        if np.any(self.functional_a <= 0):
            raise ValueError("functional_a must be strictly positive")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path_id", "terminal_b", "functional_a"])
            for i, (b, a) in enumerate(zip(self.terminal_b, self.functional_a)):
                w.writerow([i, f"{b:.17g}", f"{a:.17g}"])


@dataclass
class ClockEnsemble:
    """Bessel clocks; ``clock`` is inf where the path is still running at the horizon."""

    clock: np.ndarray
    survived: np.ndarray
    terminal_r: np.ndarray
    params: BesselParams
    undecided: np.ndarray = field(default_factory=lambda: np.zeros(0, bool))
    horizon: float = math.inf

    @property
    def n_undecided(self) -> int:
        return int(self.undecided.sum())

    @property
    def survival_fraction(self) -> float:
        keep = ~self.undecided
        return float(self.survived[keep].mean())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path_id", "clock", "survived", "terminal_r", "undecided"])
            for i in range(self.clock.size):
                w.writerow([i, f"{self.clock[i]:.17g}", int(self.survived[i]),
                            f"{self.terminal_r[i]:.17g}", int(self.undecided[i])])


def path_stream(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag, index])))


def num_threads() -> int:
    """Worker count: HW_NUM_THREADS if set, else the CPU count."""
    env = os.environ.get("HW_NUM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map_chunks(fn, n: int, threads: int | None):
    starts = list(range(0, n, CHUNK))
    threads = num_threads() if threads is None else max(1, threads)
    if threads == 1 or len(starts) == 1:
        return [fn(s) for s in starts]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, starts))


def sample_bm_exp_functional(mu: float, cfg: PathConfig, threads: int | None = None) -> PathEnsemble:
    """(B_t^(mu), A_t^(mu)) from exact Gaussian increments and the trapezoid rule on e^{2B}."""
    n, dt = cfg.n_steps, cfg.t / cfg.n_steps
    sd = math.sqrt(dt)

    def chunk(start):
        stop = min(start + CHUNK, cfg.n_paths)
        z = np.empty((stop - start, n))
        for j, i in enumerate(range(start, stop)):
            z[j] = path_stream(cfg.seed, TAG_PATH, i).standard_normal(n)
        b = np.cumsum(z * sd + mu * dt, axis=1)
        e = np.exp(2 * b)
        a = dt * (e.sum(axis=1) - 0.5 * e[:, -1] + 0.5)
        return b[:, -1].copy(), a

    parts = _map_chunks(chunk, cfg.n_paths, threads)
    return PathEnsemble(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]), mu, cfg)


def sample_terminal_bm(t: float, n: int, seed: int, tag: int = TAG_TERMINAL) -> np.ndarray:
    """n independent N(0, t) draws, one stream per draw index block."""
    return math.sqrt(t) * path_stream(seed, tag, 0).standard_normal(n)


def sample_bessel_clock(p: BesselParams, cfg: PathConfig, horizon: float | None = None,
                        threads: int | None = None) -> ClockEnsemble:
    """Clocks int_0^t ds/R_s^2 through Lamperti's time change.

    B^(nu) is run on steps of size (t/a^2)/n_steps until a^2 A^(nu) reaches
    t (the clock is then the interpolated crossing time) or the horizon.
    For nu < 0 a path is declared absorbed once even an extreme
    continuation cannot reach t: the remaining area is e^{2B_s} A'_inf with
    A'_inf = 1/(2 Gamma_|nu|), and the path is dropped when
    P(a^2 e^{2B_s} A'_inf >= t - a^2 A_s) < 1e-9. Paths neither crossed nor
    dropped at the horizon are flagged undecided; for nu >= 0 they are kept
    as survivors with clock = inf (right-censored).
    """
    target = p.t / p.a**2
    dt = target / cfg.n_steps
    if horizon is None:
        horizon = 50 * target if p.nu >= 0 else max(50 * target, 40.0 / abs(p.nu))
    max_blocks = int(math.ceil(horizon / (dt * cfg.n_steps)))
    sd = math.sqrt(dt)
    n = cfg.n_steps

    def chunk(start):
        stop = min(start + CHUNK, cfg.n_paths)
        m = stop - start
        gens = [path_stream(cfg.seed, TAG_CLOCK, i) for i in range(start, stop)]
        clock = np.full(m, np.inf)
        survived = np.zeros(m, bool)
        term_b = np.full(m, np.nan)
        undecided = np.zeros(m, bool)
        live = np.arange(m)
        b0 = np.zeros(m)
        a0 = np.zeros(m)
        for blk in range(max_blocks):
            if live.size == 0:
                break
            z = np.stack([gens[j].standard_normal(n) for j in live])
            b = b0[live, None] + np.cumsum(z * sd + p.nu * dt, axis=1)
            e = np.exp(2 * np.concatenate([b0[live, None], b], axis=1))
            a = a0[live, None] + np.cumsum(0.5 * dt * (e[:, 1:] + e[:, :-1]), axis=1)
            hit = a[:, -1] >= target
            if hit.any():
                rows = np.flatnonzero(hit)
                k = np.argmax(a[rows] >= target, axis=1)
                prev = np.where(k > 0, a[rows, k - 1], a0[live[rows]])
                frac = (target - prev) / (a[rows, k] - prev)
                idx = live[rows]
                clock[idx] = (blk * n + k + frac) * dt
                survived[idx] = True
                term_b[idx] = np.where(k > 0, b[rows, k - 1], b0[idx]) + frac * (b[rows, k] - np.where(k > 0, b[rows, k - 1], b0[idx]))
            b0[live] = b[:, -1]
            a0[live] = a[:, -1]
            still = ~hit
            if p.nu < 0:
                deficit = target - a0[live]
                x = np.exp(2 * b0[live]) / (2 * np.maximum(deficit, 1e-300))
                dead = still & (gammainc(abs(p.nu), x) < 1e-9)
                still &= ~dead
            live = live[still]
        if live.size:
            undecided[live] = p.nu < 0
            survived[live] = p.nu >= 0
        term_r = p.a * np.exp(term_b)
        return clock, survived, term_r, undecided

    parts = _map_chunks(chunk, cfg.n_paths, threads)
    cat = [np.concatenate([q[i] for q in parts]) for i in range(4)]
    return ClockEnsemble(cat[0], cat[1], cat[2], p, cat[3], horizon)


def ks_statistic(samples, cdf, upper: float | None = None) -> float:
    """sup_x |F_n(x) - cdf(x)| for the empirical CDF F_n of ``samples``.

    With ``upper`` the supremum runs over x < upper only, which is the
    statistic for samples right-censored at ``upper`` (values >= upper,
    including inf, are only known to lie beyond it).
    """
    x = np.sort(np.asarray(samples, float))
    n = x.size
    if n == 0:
        raise DomainError("samples must be nonempty")
    k = n if upper is None else int(np.searchsorted(x, upper, side="left"))
    i = np.arange(1, k + 1)
    f = np.asarray(cdf(x[:k]), float)
    terms = [0.0]
    if k:
        terms += [np.max(i / n - f), np.max(f - (i - 1) / n)]
    if upper is not None and k < n:
        # left limit at the censoring point
        terms.append(abs(float(np.asarray(cdf(np.array([upper])))[0]) - k / n))
    return float(max(terms))


def ks_two_sample(x, y) -> float:
    return float(stats.ks_2samp(np.asarray(x), np.asarray(y)).statistic)


def ks_threshold(n: int) -> float:
    return KS_ONE_SAMPLE / math.sqrt(n)


def ks_two_sample_threshold(n: int, m: int) -> float:
    return KS_TWO_SAMPLE_99 * math.sqrt((n + m) / (n * m))


def mean_and_stderr(x) -> tuple[float, float]:
    x = np.asarray(x, float)
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class BougerolResult:
    statistic: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.threshold


def bougerol_check(t: float, variant: str, cfg: PathConfig, t_other: float | None = None,
                   threads: int | None = None) -> BougerolResult:
    """Two-sample KS between beta(A_t) and sinh(B_t) (plain) or sinh(B_t + eps t) (drifted).

    beta(A) is sampled as sqrt(A) Z with Z independent of A. ``t_other``
    evaluates the right-hand population at a different time, which must be
    detected as a mismatch.
    """
    if variant not in ("plain", "drifted"):
        raise DomainError("variant must be 'plain' or 'drifted'")
    mu = 0.0 if variant == "plain" else 1.0
    ens = sample_bm_exp_functional(mu, PathConfig(t, cfg.n_steps, cfg.n_paths, cfg.seed), threads)
    z = path_stream(cfg.seed, TAG_NORMAL, 0).standard_normal(cfg.n_paths)
    left = np.sqrt(ens.functional_a) * z
    t2 = t if t_other is None else t_other
    b = sample_terminal_bm(t2, cfg.n_paths, cfg.seed)
    if variant == "drifted":
        eps = np.where(path_stream(cfg.seed, TAG_SIGN, 0).random(cfg.n_paths) < 0.5, -1.0, 1.0)
        b = b + eps * t2
    right = np.sinh(b)
    return BougerolResult(ks_two_sample(left, right), ks_two_sample_threshold(cfg.n_paths, cfg.n_paths))


def stieltjes_check(n: int, t: float, cfg: QuadratureConfig | None = None) -> float:
    """|int e^{-x^2/2t} e^{nx} sin(pi x/t) dx|, which vanishes for integer n."""
    if abs(n) > 10:
        raise DomainError("|n| <= 10 required")
    cfg = cfg or QuadratureConfig(abs_tol=1e-14, rel_tol=1e-14)
    norm = math.sqrt(2 * math.pi * t)
    est = expect_gaussian(lambda x: np.exp(n * x) * np.sin(math.pi * x / t), t, cfg, growth=abs(n))
    return abs(float(est.value)) * norm
