"""Seeded, counter-based random streams.

Every stream is a Philox-4x64 generator whose key is derived from
``(seed, stream_id, *substream path)`` through ``numpy.random.SeedSequence``.
Philox is counter based, so any substream is constructed directly from its
key without stepping through the parent sequence.

Normals are produced by numpy's ziggurat sampler (``Generator.standard_normal``);
numba kernels call the same method on the same generator object, which yields
the identical sequence.
"""
from __future__ import annotations

import os

import numpy as np

DEFAULT_SEED = 42
SEED_ENV_VAR = "ITERBM_SEED"

_MASK64 = (1 << 64) - 1
_FORK_BASE = 1 << 32


def default_seed() -> int:
    """Seed from ``$ITERBM_SEED`` if set, else :data:`DEFAULT_SEED`."""
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    return int(raw, 0)


class RngStream:
    """Deterministic random source identified by ``(seed, stream_id)``.

    Parameters
    ----------
    seed : int
        Any integer; it is reduced modulo 2**64.
    stream_id : int
        Non-negative stream index. Distinct ids give independent streams.
    """

    __slots__ = ("seed", "stream_id", "path", "_gen", "_forks")

    def __init__(self, seed: int, stream_id: int = 0, path: tuple = ()):
        if stream_id < 0:
            raise ValueError("stream_id must be non-negative")
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))
        self._forks = 0

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"

    @property
    def generator(self) -> np.random.Generator:
        """Underlying numpy generator (shared state, not a copy)."""
        return self._gen

    def substream(self, index: int) -> "RngStream":
        """Independent child stream; does not advance this stream."""
        if index < 0:
            raise ValueError("substream index must be non-negative")
        return RngStream(self.seed, self.stream_id, self.path + (index,))

    def fork(self) -> "RngStream":
        """Next child in this stream's fork sequence.

        The k-th fork is a pure function of ``(seed, stream_id, path, k)`` and
        never coincides with an explicit :meth:`substream`.
        """
        k = self._forks
        self._forks += 1
        return RngStream(self.seed, self.stream_id, self.path + (_FORK_BASE + k,))

    def spawn(self, n: int) -> list["RngStream"]:
        return [self.substream(i) for i in range(n)]

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def sign(self, size=None):
        """Fair random signs in {-1, +1} (float)."""
        u = self._gen.random(size)
        return np.where(u < 0.5, -1.0, 1.0) if size is not None else (-1.0 if u < 0.5 else 1.0)


def new_stream(seed: int | None = None, stream_id: int = 0) -> RngStream:
    if seed is None:
        seed = default_seed()
    return RngStream(seed, stream_id)


def sample_normal(s: RngStream) -> float:
    return float(s.normal())


def sample_uniform01(s: RngStream) -> float:
    return float(s.uniform())


def sample_sign(s: RngStream) -> float:
    return s.sign()
