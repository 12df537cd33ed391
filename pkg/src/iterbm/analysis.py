"""Reference laws, Kolmogorov-Smirnov tests and drift diagnostics for the p-point chain."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gamma, kolmogorov

from . import kernels
from .iterate import PointVector, chain_step_batch
from .parallel import replicate
from .rng import RngStream


# --------------------------------------------------------------------------
# signed exponential

def signed_exp_cdf(x, lam: float = 2.0):
    """CDF of the law with density ``(lam/2) exp(-lam |x|)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    x = np.asarray(x, dtype=np.float64)
    # clip keeps exp() finite on the branch np.where discards
    neg = 0.5 * np.exp(lam * np.minimum(x, 0.0))
    pos = 1.0 - 0.5 * np.exp(-lam * np.maximum(x, 0.0))
    out = np.where(x < 0, neg, pos)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SignedExponential:
    lam: float = 2.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def pdf(self, x):
        return 0.5 * self.lam * np.exp(-self.lam * np.abs(x))

    def cdf(self, x):
        return signed_exp_cdf(x, self.lam)

    def ppf(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.where(u < 0.5, np.log(2 * u) / self.lam, -np.log(2 * (1 - u)) / self.lam)

    def sample(self, rng: RngStream, size=None):
        return rng.sign(size) * rng.generator.exponential(1.0 / self.lam, size)

    @property
    def mean_abs(self):
        return 1.0 / self.lam

    @property
    def second_moment(self):
        return 2.0 / self.lam ** 2


# --------------------------------------------------------------------------
# KS tests

@dataclass
class TestReport:
    name: str
    statistic: float
    threshold: float
    p_value_approx: float
    sample_sizes: tuple
    seeds: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    @property
    def passed(self) -> bool:
        return bool(self.statistic < self.threshold)

    def to_dict(self):
        d = asdict(self)
        d["pass"] = self.passed
        d["sample_sizes"] = list(self.sample_sizes)
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _ks_pvalue(d, en):
    # Stephens' small-sample correction of the asymptotic Kolmogorov law
    lam = (math.sqrt(en) + 0.12 + 0.11 / math.sqrt(en)) * d
    return float(min(1.0, max(0.0, kolmogorov(lam))))


def _critical(en, alpha_coeff=1.358):
    return alpha_coeff / math.sqrt(en)


def ks_one_sample(samples, cdf, threshold: float | None = None, name: str = "ks-1") -> TestReport:
    """``D = sup |F_n - F|`` against a continuous CDF.

    ``threshold`` defaults to the asymptotic 5% critical value.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64).reshape(-1))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))
    thr = _critical(n) if threshold is None else threshold
    return TestReport(name, d, thr, _ks_pvalue(d, n), (n,))


def ks_two_sample(a, b, threshold: float | None = None, name: str = "ks-2") -> TestReport:
    """``D = sup |F_a - F_b|`` between two empirical laws (ties handled exactly)."""
    a = np.sort(np.asarray(a, dtype=np.float64).reshape(-1))
    b = np.sort(np.asarray(b, dtype=np.float64).reshape(-1))
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise ValueError("empty sample")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / n
    fb = np.searchsorted(b, pts, side="right") / m
    d = float(np.max(np.abs(fa - fb)))
    en = n * m / (n + m)
    thr = _critical(en) if threshold is None else threshold
    return TestReport(name, d, thr, _ks_pvalue(d, en), (n, m))


# --------------------------------------------------------------------------
# Lyapunov function and drift

def gaussian_abs_moment(a: float) -> float:
    """``E|N|^a`` for a standard normal, ``a > -1``."""
    return 2 ** (a / 2) * gamma((a + 1) / 2) / math.sqrt(math.pi)


def _coords(x):
    c = x.coords if isinstance(x, PointVector) else np.asarray(x, dtype=np.float64).reshape(-1)
    return c


def _lyapunov_rows(Y):
    """V for each row of a 2-d array (origin included as an extra point)."""
    R, p = Y.shape
    Z = np.concatenate([np.zeros((R, 1)), Y], axis=1)
    iu, ju = np.triu_indices(p + 1, k=1)
    gaps = np.abs(Z[:, iu] - Z[:, ju])
    return np.abs(Y).max(axis=1, initial=0.0) + np.sum(gaps ** -0.5, axis=1)


def lyapunov_V(x) -> float:
    """``max_i |x_i| + sum_{0<=i<j<=p} |x_i - x_j|^{-1/2}`` with ``x_0 = 0``."""
    c = PointVector(_coords(x)).coords
    return float(_lyapunov_rows(c[None, :])[0])


def is_M_sparse(x, M: float) -> bool:
    if not M > 1:
        raise ValueError("M must exceed 1")
    c = _coords(x)
    if c.size == 0:
        return False
    top = np.max(np.abs(c))
    if not (1.0 / M <= top <= M):
        return False
    if c.size > 1:
        s = np.sort(c)
        if np.min(np.diff(s)) < 1.0 / M:
            return False
    return True


@dataclass
class DriftEstimate:
    """Monte Carlo estimate of ``E_x[V(W_1)] - V(x)``."""
    drift: float
    stderr: float
    v_start: float
    next_mean: float
    replicas: int
    batches: int

    def upper(self, k=3.0):
        return self.drift + k * self.stderr


def _v_next_block(count, stream, x):
    X = np.tile(x, (count, 1))
    return _lyapunov_rows(chain_step_batch(X, stream))


def drift_estimate(x, replicas: int, rng: RngStream, batches: int = 30,
                   workers: int = 1, block_size: int = 8192) -> DriftEstimate:
    """Estimate the one-step drift of V from ``x``; stderr from batch means."""
    x = PointVector(_coords(x)).coords
    if replicas < 100:
        raise ValueError("replicas must be at least 100")
    batches = max(30, batches)
    batches = min(batches, replicas)
    v = replicate(_v_next_block, replicas, rng, block_size, workers, (x,))
    means = np.array([math.fsum(b) / b.size for b in np.array_split(v, batches)])
    next_mean = math.fsum(v) / v.size
    stderr = float(np.std(means, ddof=1) / math.sqrt(batches))
    v0 = lyapunov_V(x)
    return DriftEstimate(next_mean - v0, stderr, v0, next_mean, replicas, batches)


def predicted_next_v_single(a: float) -> float:
    """Exact ``E[V(W_1)]`` from the one-point state ``(a,)``."""
    a = abs(a)
    return math.sqrt(a) * gaussian_abs_moment(1.0) + a ** -0.25 * gaussian_abs_moment(-0.5)


@lru_cache(maxsize=None)
def _c1_cached(seed, half_steps, replicas):
    m = replicate(_c1_block, replicas, RngStream(seed, 0xC1), 1024, 1, (half_steps,))
    return float(math.fsum(m) / m.size), float(np.std(m, ddof=1) / math.sqrt(m.size))


def _c1_block(count, stream, half_steps):
    return kernels.two_sided_max_abs(half_steps, count, stream.generator)


def estimate_c1(seed: int = 0, grid_size: int = 2 ** 16, replicas: int = 10 ** 4):
    """Grid Monte Carlo estimate of ``E[max_{[-1,1]} |B|]`` and its stderr (cached)."""
    return _c1_cached(int(seed), grid_size // 2, int(replicas))


def drift_constants(p: int, c1: float):
    """``(C_2, C_3)`` for dimension ``p`` given ``C_1``."""
    c2 = p * gaussian_abs_moment(-0.5)
    return c2, 2 * max(c1, c2)


def far_states(count: int, rng: RngStream, c1: float, p_choices=(1, 2, 3)):
    """Random states with ``sqrt(V(x)) > 2 C_3``: far out, or with a near collision."""
    out = []
    while len(out) < count:
        p = int(p_choices[int(rng.uniform() * len(p_choices))])
        _, c3 = drift_constants(p, c1)
        scale = 10 ** (rng.uniform() * 8 - 4)
        x = rng.normal(p) * scale
        if not np.all(x != 0) or np.unique(x).size != p:
            continue
        if lyapunov_V(x) > 4 * c3 * c3:
            out.append(x)
    return out


def minorization_overlap(y, z, replicas: int, rng: RngStream, bins: int = 20) -> float:
    """Histogram overlap ``sum_k min(h_y, h_z)`` of one-step images of ``y`` and ``z``.

    Only the first coordinate is histogrammed. A positive value is the
    qualitative sign that the two one-step laws are mutually absolutely continuous.
    """
    y, z = PointVector(_coords(y)).coords, PointVector(_coords(z)).coords
    a = chain_step_batch(np.tile(y, (replicas, 1)), rng)[:, 0]
    b = chain_step_batch(np.tile(z, (replicas, 1)), rng)[:, 0]
    lo, hi = min(a.min(), b.min()), max(a.max(), b.max())
    ha, _ = np.histogram(a, bins=bins, range=(lo, hi))
    hb, _ = np.histogram(b, bins=bins, range=(lo, hi))
    return float(np.minimum(ha / replicas, hb / replicas).sum())
