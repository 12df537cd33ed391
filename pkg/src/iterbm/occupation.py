"""Occupation measures of iterated paths: samples, local time, Fourier, oscillation, variation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import kernels
from .iterate import IteratedPath
from .parallel import replicate
from .rng import RngStream


# --------------------------------------------------------------------------
# time laws: quantile transforms of a uniform stream

def uniform_time_law(lo: float = 0.0, hi: float = 1.0):
    if not hi > lo:
        raise ValueError("need lo < hi")
    return lambda u: lo + (hi - lo) * u


def gaussian_time_law(loc: float = 0.0, scale: float = 1.0):
    return lambda u: loc + scale * ndtri(u)


def occupation_samples(n_iter: int, m: int, rng: RngStream, time_law=None,
                       path: IteratedPath | None = None) -> np.ndarray:
    """``W_n(t_j)`` for ``m`` i.i.d. times ``t_j`` on one iterated path.

    ``time_law`` maps uniforms on [0, 1) to times (a quantile transform); the
    default is the uniform law on [0, 1]. Conditionally on the path these are
    i.i.d. draws from its occupation measure.
    """
    if n_iter < 1 or m < 1:
        raise ValueError("n_iter and m must be positive")
    law = time_law or uniform_time_law()
    t = np.asarray(law(rng.uniform(m)), dtype=np.float64)
    if not np.all(np.isfinite(t)):
        raise ValueError("time law produced non-finite times")
    ip = path if path is not None else IteratedPath(n_iter, rng)
    return ip.evaluate_batch(t)


# --------------------------------------------------------------------------
# local time

@dataclass
class OccupationEstimate:
    bin_edges: np.ndarray
    masses: np.ndarray
    sample_count: int
    support_lo: float
    support_hi: float
    degenerate: bool = False

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    @property
    def widths(self):
        return np.diff(self.bin_edges)

    def density(self) -> np.ndarray:
        """Local-time estimate per bin (mass / width); a point mass for degenerate estimates."""
        if self.degenerate:
            return np.full(self.masses.size, np.inf)
        return self.masses / self.widths

    def holder_quotients(self, exponent: float = 0.4) -> np.ndarray:
        """``|L(x) - L(y)| / |x - y|^exponent`` between adjacent bin centres."""
        if self.degenerate or self.masses.size < 2:
            return np.zeros(0)
        d = self.density()
        return np.abs(np.diff(d)) / self.widths[:-1] ** exponent

    def to_rows(self):
        return [(float(a), float(b), float(w))
                for a, b, w in zip(self.bin_edges[:-1], self.bin_edges[1:], self.masses)]


def local_time_estimate(samples, bins: int) -> OccupationEstimate:
    """Equal-width histogram over ``[min, max]`` of the samples, normalized to mass 1."""
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("no samples")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return OccupationEstimate(np.array([lo, hi]), np.ones(1), x.size, lo, hi, degenerate=True)
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    masses = counts / x.size
    return OccupationEstimate(edges, masses, x.size, lo, hi)


def l1_distance(a: OccupationEstimate, b: OccupationEstimate) -> float:
    """``int |L_a - L_b|`` between two histogram densities with arbitrary edges."""
    edges = np.union1d(a.bin_edges, b.bin_edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    w = np.diff(edges)

    def dens(est):
        i = np.searchsorted(est.bin_edges, mids, side="right") - 1
        inside = (i >= 0) & (i < est.masses.size)
        out = np.zeros(mids.size)
        out[inside] = est.density()[i[inside]]
        return out

    return float(np.sum(np.abs(dens(a) - dens(b)) * w))


# --------------------------------------------------------------------------
# Fourier transform of the occupation measure

def _fourier_block(count, stream, xis, n_iter, m):
    out = np.empty((count, xis.size))
    for r in range(count):
        w = occupation_samples(n_iter, m, stream)
        s = np.exp(1j * np.outer(xis, w)).sum(axis=1)
        # U-statistic over distinct pairs: drop the m diagonal terms
        out[r] = (np.abs(s) ** 2 - m) / (m * (m - 1))
    return out


def fourier_second_moment(xi, n_iter: int, replicas: int, m_per_replica: int, rng: RngStream,
                          workers: int = 1, block_size: int = 100):
    """Mean over paths of the unbiased estimate of ``|Phi(xi)|^2``.

    ``xi`` may be a scalar or a sequence (all values share the same paths).
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if m_per_replica < 2:
        raise ValueError("m_per_replica must be >= 2")
    xis = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    per = replicate(_fourier_block, replicas, rng, block_size, workers,
                    (xis, n_iter, m_per_replica))
    est = np.array([math.fsum(per[:, k]) / replicas for k in range(xis.size)])
    return float(est[0]) if np.ndim(xi) == 0 else est


def fourier_target(xi):
    xi = np.asarray(xi, dtype=np.float64)
    return 4.0 / (4.0 + xi ** 2)


# --------------------------------------------------------------------------
# oscillation and variation

def _grid(t, grid_size):
    if not t > 0:
        raise ValueError("t must be positive")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    return np.linspace(0.0, t, grid_size)


def oscillation_on_grid(n_iter: int, t: float, grid_size: int, rng: RngStream,
                        path: IteratedPath | None = None) -> float:
    """max - min of ``W_n`` over ``grid_size`` equally spaced points of [0, t]."""
    g = _grid(t, grid_size)
    ip = path if path is not None else IteratedPath(n_iter, rng)
    w = ip.evaluate_batch(g)
    return float(w.max() - w.min())


def _grid_osc_block(count, stream, n_iter, grid):
    return kernels.grid_oscillation(n_iter, grid, count, stream.generator)


def oscillation_replicas(n_iter: int, t: float, grid_size: int, replicas: int, rng: RngStream,
                         workers: int = 1, block_size: int = 64) -> np.ndarray:
    """:func:`oscillation_on_grid` for ``replicas`` independent paths (fused kernel)."""
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    g = _grid(t, grid_size)
    return replicate(_grid_osc_block, replicas, rng, block_size, workers, (n_iter, g))


def p_variation(n_iter: int, order: float, grid_levels, rng: RngStream,
                path: IteratedPath | None = None) -> np.ndarray:
    """``sum_j |W_n((j+1)/2^k) - W_n(j/2^k)|^order`` for each dyadic level ``k``.

    All levels use one path, refined in ascending order through its cache.
    """
    if not order > 0:
        raise ValueError("order must be positive")
    levels = [int(k) for k in grid_levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("grid_levels must be strictly ascending")
    ip = path if path is not None else IteratedPath(n_iter, rng)
    out = []
    for k in levels:
        w = ip.evaluate_batch(np.arange(2 ** k + 1) / 2.0 ** k)
        out.append(math.fsum(np.abs(np.diff(w)) ** order))
    return np.array(out)
