"""Lazily materialized two-sided Brownian motion."""
from __future__ import annotations

import math

import numpy as np

from .io import write_columns
from .kernels import fill_knots
from .rng import RngStream


class LazyBrownianPath:
    """Two-sided Brownian motion sampled on demand.

    The path is stored as sorted knot arrays pinned at ``(0, 0)``. A query at
    a new time is drawn from its exact conditional law given the knots: a
    Brownian bridge between the two neighbouring knots, or a free Gaussian
    increment beyond the outermost knot. Answers are cached, so the path
    stays consistent however it is queried.

    Times are compared exactly; callers that want snapping must round first.
    """

    def __init__(self, rng: RngStream):
        self.rng = rng
        self._t = np.zeros(1)
        self._v = np.zeros(1)

    def __len__(self):
        return self._t.size

    @property
    def knots(self):
        """``(times, values)`` copies in ascending time order."""
        return self._t.copy(), self._v.copy()

    def evaluate(self, t: float) -> float:
        t = float(t)
        if not math.isfinite(t):
            raise ValueError(f"query time must be finite, got {t!r}")
        kt, kv = self._t, self._v
        i = int(np.searchsorted(kt, t))
        if i < kt.size and kt[i] == t:
            return float(kv[i])
        z = float(self.rng.normal())
        if i == kt.size:
            v = kv[-1] + math.sqrt(t - kt[-1]) * z
        elif i == 0:
            v = kv[0] + math.sqrt(kt[0] - t) * z
        else:
            tl, tr = kt[i - 1], kt[i]
            vl, vr = kv[i - 1], kv[i]
            span = tr - tl
            mean = vl + (t - tl) * (vr - vl) / span
            var = max((t - tl) * (tr - t) / span, 0.0)
            v = mean + math.sqrt(var) * z
        v = float(v)
        self._t = np.concatenate((kt[:i], (t,), kt[i:]))
        self._v = np.concatenate((kv[:i], (v,), kv[i:]))
        return v

    def evaluate_batch(self, ts) -> np.ndarray:
        """Evaluate at every entry of ``ts``; same law as calling :meth:`evaluate` in turn.

        New times are sorted and filled jointly, which is exact because each
        new point is drawn from its conditional law given everything before it.
        """
        ts = np.asarray(ts, dtype=np.float64)
        shape = ts.shape
        ts = ts.reshape(-1)
        if ts.size == 0:
            return ts.reshape(shape)
        if not np.all(np.isfinite(ts)):
            raise ValueError("query times must be finite")
        uq, inv = np.unique(ts, return_inverse=True)
        kt, kv = self._t, self._v
        idx = np.searchsorted(kt, uq)
        hit = kt[np.minimum(idx, kt.size - 1)] == uq
        vals = np.empty(uq.size)
        vals[hit] = kv[idx[hit]]
        new = uq[~hit]
        if new.size:
            new_v = fill_knots(kt, kv, new, self.rng.generator)
            vals[~hit] = new_v
            pos = idx[~hit]
            self._t = np.insert(kt, pos, new)
            self._v = np.insert(kv, pos, new_v)
        return vals[inv.reshape(-1)].reshape(shape)

    def to_csv(self, path) -> None:
        """Dump knots as ``time,value`` rows in ascending time."""
        write_columns(path, ["time", "value"], self._t, self._v)


def evaluate(path: LazyBrownianPath, t: float) -> float:
    return path.evaluate(t)


def evaluate_batch(path: LazyBrownianPath, ts) -> np.ndarray:
    return path.evaluate_batch(ts)
