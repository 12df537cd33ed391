"""Iterated Brownian motion, the p-point chain and its limit laws."""
from __future__ import annotations

import numpy as np

from . import kernels
from .brownian import LazyBrownianPath
from .parallel import replicate
from .rng import RngStream

DEFAULT_N_STEPS = 12
DEFAULT_N_TERMS = 30


class IteratedPath:
    """``W_n = B_n o ... o B_1`` built from ``n`` independent lazy paths.

    Each level draws from its own child stream of ``rng``.
    """

    def __init__(self, n: int, rng: RngStream):
        if n < 1:
            raise ValueError("an iterated path needs at least one level")
        base = rng.fork()
        self.levels = [LazyBrownianPath(base.substream(k)) for k in range(n)]

    @property
    def n(self):
        return len(self.levels)

    def evaluate(self, t: float) -> float:
        x = t
        for level in self.levels:
            x = level.evaluate(x)
        return x

    def evaluate_batch(self, ts) -> np.ndarray:
        x = np.asarray(ts, dtype=np.float64)
        for level in self.levels:
            x = level.evaluate_batch(x)
        return x


def eval_iterated(ip: IteratedPath, t: float) -> float:
    return ip.evaluate(t)


class PointVector:
    """A p-uplet of pairwise distinct nonzero reals."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        c = np.array(coords, dtype=np.float64).reshape(-1)
        if not in_state_space(c):
            raise ValueError(f"coordinates must be finite, nonzero and pairwise distinct: {c}")
        c.setflags(write=False)
        self.coords = c

    def __len__(self):
        return self.coords.size

    def __iter__(self):
        return iter(self.coords.tolist())

    def __array__(self, dtype=None, copy=None):
        return self.coords if dtype is None else self.coords.astype(dtype)

    def __repr__(self):
        return f"PointVector({self.coords.tolist()})"

    def __eq__(self, other):
        return isinstance(other, PointVector) and np.array_equal(self.coords, other.coords)

    __hash__ = None


def in_state_space(x) -> bool:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)) or np.any(x == 0.0):
        return False
    return np.unique(x).size == x.size


def _rows_in_state_space(Y):
    if Y.shape[1] == 0:
        return np.ones(Y.shape[0], dtype=bool)
    S = np.sort(Y, axis=1)
    ok = np.all(S != 0.0, axis=1) & np.all(np.isfinite(S), axis=1)
    if Y.shape[1] > 1:
        ok &= np.all(np.diff(S, axis=1) != 0.0, axis=1)
    return ok


def chain_step_batch(X, rng: RngStream) -> np.ndarray:
    """One chain step for every row of ``X``, each row with its own Brownian motion.

    Rows whose image leaves the state space (a floating-point collision) are
    redrawn from the same input.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("expected a 2-d array of p-uplets")
    Y = kernels.chain_rows(X, rng.generator)
    bad = ~_rows_in_state_space(Y)
    while bad.any():
        Y[bad] = kernels.chain_rows(X[bad], rng.generator)
        bad = ~_rows_in_state_space(Y)
    return Y


def chain_step(x, rng: RngStream) -> PointVector:
    """Image ``(B(x_1), ..., B(x_p))`` of ``x`` under one fresh two-sided Brownian motion."""
    x = x if isinstance(x, PointVector) else PointVector(x)
    if len(x) == 0:
        return x
    return PointVector(chain_step_batch(x.coords[None, :], rng)[0])


def sample_nu_p(x0, n_steps: int = DEFAULT_N_STEPS, rng: RngStream = None) -> PointVector:
    """Chain state after ``n_steps`` steps from ``x0``; approximately a stationary draw."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    x = x0 if isinstance(x0, PointVector) else PointVector(x0)
    for _ in range(n_steps):
        x = chain_step(x, rng)
    return x


def _nu_p_block(count, stream, x0, n_steps):
    X = np.tile(x0, (count, 1))
    for _ in range(n_steps):
        X = chain_step_batch(X, stream)
    return X


def sample_nu_p_batch(x0, n_steps: int, replicas: int, rng: RngStream,
                      workers: int = 1, block_size: int = 4096) -> np.ndarray:
    """``replicas`` independent chain runs from ``x0``; returns shape ``(replicas, p)``."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    x0 = np.asarray(PointVector(x0).coords)
    return replicate(_nu_p_block, replicas, rng, block_size, workers, (x0, n_steps))


def _iterated_point_block(count, stream, n_iter, t):
    return kernels.iterated_point(n_iter, t, count, stream.generator)


def sample_iterated_point(n_iter: int, t: float, replicas: int, rng: RngStream,
                          workers: int = 1, block_size: int = 65536) -> np.ndarray:
    """``W_n(t)`` over independent iterated paths, each queried once at ``t``.

    A fresh path queried at a single point ``x`` returns ``sqrt|x| N``; this is
    that rule applied level by level without building path objects.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return replicate(_iterated_point_block, replicas, rng, block_size, workers, (n_iter, float(t)))


def sample_limit_marginal(rng: RngStream, n_terms: int = DEFAULT_N_TERMS, size=None):
    """Draw ``+/- prod_i |N_i| ** 2**-i``, the limit law of ``W_n(t)``."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    z = rng.normal(shape + (n_terms,))
    modulus = np.prod(np.abs(z) ** (0.5 ** np.arange(n_terms)), axis=-1)
    x = rng.sign(shape) * modulus
    return float(x) if size is None else x


def verify_fixed_point(rng: RngStream, m: int, candidate=None, threshold: float = 0.01):
    """Two-sample KS between ``X`` and ``sqrt(X) |N|`` for ``m`` draws.

    ``candidate`` replaces the limit law by any nonnegative sample of size ``m``;
    by default ``X`` is the modulus of :func:`sample_limit_marginal`.
    """
    from .analysis import ks_two_sample

    if m < 10_000:
        raise ValueError("m must be at least 10^4")
    if candidate is None:
        x = np.abs(sample_limit_marginal(rng, size=m))
    else:
        x = np.abs(np.asarray(candidate, dtype=np.float64))
        if x.size != m:
            raise ValueError("candidate sample must have m entries")
    n = np.abs(rng.normal(m))
    return ks_two_sample(x, np.sqrt(x) * n, threshold=threshold, name="fixed-point")


def sample_limit_oscillation(rng: RngStream, n_terms: int = DEFAULT_N_TERMS,
                             grid_size: int = 2 ** 14, size=None, workers: int = 1,
                             block_size: int = 256):
    """``prod_i D_i ** 2**-i`` with ``D_i`` grid oscillations of independent motions on [0, 1]."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    if size is None:
        return float(kernels.range_product(n_terms, grid_size, 1, rng.generator)[0])
    return replicate(_range_product_block, size, rng, block_size, workers, (n_terms, grid_size))


def _range_product_block(count, stream, n_terms, grid_size):
    return kernels.range_product(n_terms, grid_size, count, stream.generator)
