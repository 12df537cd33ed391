"""Hot loops, each in a numba version and a pure-numpy version.

Both versions of a kernel draw normals from the generator in the same order,
so for a given stream they return the same numbers up to floating-point
rounding. The active version is chosen by :mod:`iterbm._backend`.

Draw order conventions (shared by both versions):

* points left of all knots are filled walking outward (descending time),
  then interior points in ascending time, then points right of all knots in
  ascending time;
* replica-major, then level / term, then position.
"""
import numpy as np

from . import _backend
from ._backend import njit


# --------------------------------------------------------------------------
# knot filling on a lazy Brownian path

@njit
def _fill_knots_nb(kt, kv, q, gen):
    m = q.size
    out = np.empty(m)
    if m == 0:
        return out
    kmax = kt.size - 1
    n_left = np.searchsorted(q, kt[0])
    n_right = m - np.searchsorted(q, kt[kmax])

    pt = kt[0]
    pv = kv[0]
    for j in range(n_left - 1, -1, -1):
        pv = pv + np.sqrt(pt - q[j]) * gen.standard_normal()
        pt = q[j]
        out[j] = pv

    r = 1
    cur = -1
    tl = 0.0
    vl = 0.0
    for j in range(n_left, m - n_right):
        s = q[j]
        while kt[r] < s:
            r += 1
        if r != cur:
            cur = r
            tl = kt[r - 1]
            vl = kv[r - 1]
        tr = kt[r]
        vr = kv[r]
        span = tr - tl
        mean = vl + (s - tl) * (vr - vl) / span
        var = (s - tl) * (tr - s) / span
        if var < 0.0:
            var = 0.0
        v = mean + np.sqrt(var) * gen.standard_normal()
        out[j] = v
        tl = s
        vl = v

    pt = kt[kmax]
    pv = kv[kmax]
    for j in range(m - n_right, m):
        pv = pv + np.sqrt(q[j] - pt) * gen.standard_normal()
        pt = q[j]
        out[j] = pv
    return out


def _fill_knots_np(kt, kv, q, gen):
    m = q.size
    out = np.empty(m)
    if m == 0:
        return out
    n_left = int(np.searchsorted(q, kt[0]))
    n_right = m - int(np.searchsorted(q, kt[-1]))
    n_int = m - n_left - n_right
    z = gen.standard_normal(m)

    if n_left:
        ql = q[:n_left][::-1]
        prev = np.concatenate(([kt[0]], ql[:-1]))
        inc = np.sqrt(prev - ql) * z[:n_left]
        out[:n_left] = np.cumsum(np.concatenate(([kv[0]], inc)))[1:][::-1]

    if n_int:
        sl = slice(n_left, n_left + n_int)
        s = q[sl]
        g = np.searchsorted(kt, s)
        tr = kt[g]
        vr = kv[g]
        first = np.empty(n_int, dtype=bool)
        first[0] = True
        first[1:] = g[1:] != g[:-1]
        prev = np.empty(n_int)
        prev[0] = 0.0
        prev[1:] = s[:-1]
        prev = np.where(first, kt[g - 1], prev)
        # rescaled residual Y = (X - v_r)/(t_r - t) is a random walk inside each gap
        dy = z[sl] * np.sqrt((s - prev) / ((tr - s) * (tr - prev)))
        y0 = (kv[g - 1] - vr) / (tr - kt[g - 1])
        dy[first] += y0[first]
        c = np.cumsum(dy)
        starts = np.flatnonzero(first)
        base = np.concatenate(([0.0], c[starts[1:] - 1]))
        y = c - base[np.cumsum(first) - 1]
        out[sl] = vr + (tr - s) * y

    if n_right:
        qr = q[m - n_right:]
        prev = np.concatenate(([kt[-1]], qr[:-1]))
        inc = np.sqrt(qr - prev) * z[m - n_right:]
        out[m - n_right:] = np.cumsum(np.concatenate(([kv[-1]], inc)))[1:]
    return out


def fill_knots(kt, kv, q, gen):
    """Sample a Brownian path at new times ``q`` given knots ``(kt, kv)``.

    ``kt`` is strictly increasing, ``q`` is strictly increasing and disjoint
    from ``kt``. Returns the values at ``q``.
    """
    if _backend.USE_NUMBA:
        return _fill_knots_nb(kt, kv, q, gen)
    return _fill_knots_np(kt, kv, q, gen)


# --------------------------------------------------------------------------
# fresh two-sided path at arbitrary points

@njit
def _walk_sorted_nb(x, order, gen):
    n = x.size
    out = np.empty(n)
    n_neg = 0
    while n_neg < n and x[order[n_neg]] < 0.0:
        n_neg += 1
    pt = 0.0
    pv = 0.0
    for i in range(n_neg - 1, -1, -1):
        t = x[order[i]]
        if t != pt:
            pv = pv + np.sqrt(pt - t) * gen.standard_normal()
            pt = t
        out[order[i]] = pv
    pt = 0.0
    pv = 0.0
    for i in range(n_neg, n):
        t = x[order[i]]
        if t != pt:
            pv = pv + np.sqrt(t - pt) * gen.standard_normal()
            pt = t
        out[order[i]] = pv
    return out


def _fresh_eval_nb(x, gen):
    # numpy's C argsort is several times faster than numba's
    return _walk_sorted_nb(x, np.argsort(x), gen)


_ORIGIN_T = np.zeros(1)
_ORIGIN_V = np.zeros(1)


def _fresh_eval_np(x, gen):
    uq, inv = np.unique(x, return_inverse=True)
    vals = np.zeros(uq.size)
    nz = uq != 0.0
    vals[nz] = _fill_knots_np(_ORIGIN_T, _ORIGIN_V, uq[nz], gen)
    return vals[inv.reshape(-1)]


def fresh_eval(x, gen):
    """Values of a fresh two-sided Brownian motion at the points ``x``.

    Duplicated points share one value and zero maps to zero; neither draws.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if _backend.USE_NUMBA:
        return _fresh_eval_nb(x, gen)
    return _fresh_eval_np(x, gen)


# --------------------------------------------------------------------------
# one chain step for many p-uplets at once

@njit
def _chain_rows_nb(X, gen):
    R, p = X.shape
    Y = np.empty((R, p))
    for r in range(R):
        row = X[r]
        order = np.argsort(row)
        n_neg = 0
        while n_neg < p and row[order[n_neg]] < 0.0:
            n_neg += 1
        pt = 0.0
        pv = 0.0
        for i in range(n_neg - 1, -1, -1):
            t = row[order[i]]
            pv = pv + np.sqrt(pt - t) * gen.standard_normal()
            pt = t
            Y[r, order[i]] = pv
        pt = 0.0
        pv = 0.0
        for i in range(n_neg, p):
            t = row[order[i]]
            pv = pv + np.sqrt(t - pt) * gen.standard_normal()
            pt = t
            Y[r, order[i]] = pv
    return Y


def _chain_rows_np(X, gen):
    R, p = X.shape
    order = np.argsort(X, axis=1, kind="stable")
    S = np.take_along_axis(X, order, axis=1)
    neg = S < 0.0
    n_neg = neg.sum(axis=1)[:, None]
    j = np.arange(p)[None, :]
    draw_idx = np.where(j < n_neg, n_neg - 1 - j, j)
    Z = gen.standard_normal((R, p))
    z = np.take_along_axis(Z, draw_idx, axis=1)
    zeros = np.zeros((R, 1))
    upper = np.where(j + 1 < n_neg, np.concatenate([S[:, 1:], zeros], axis=1), 0.0)
    lower = np.where(j - 1 >= n_neg, np.concatenate([zeros, S[:, :-1]], axis=1), 0.0)
    gap = np.where(neg, upper - S, S - lower)
    inc = np.sqrt(gap) * z
    pos_vals = np.cumsum(np.where(neg, 0.0, inc), axis=1)
    neg_vals = np.cumsum(np.where(neg, inc, 0.0)[:, ::-1], axis=1)[:, ::-1]
    Y = np.empty_like(X)
    np.put_along_axis(Y, order, np.where(neg, neg_vals, pos_vals), axis=1)
    return Y


def chain_rows(X, gen):
    """Apply an independent fresh Brownian motion to each row of ``X``.

    Rows are assumed to hold pairwise distinct nonzero coordinates.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if _backend.USE_NUMBA:
        return _chain_rows_nb(X, gen)
    return _chain_rows_np(X, gen)


# --------------------------------------------------------------------------
# iterated paths evaluated on fresh stacks, many replicas

@njit
def _iterated_point_nb(n_iter, t, replicas, gen):
    out = np.empty(replicas)
    for r in range(replicas):
        x = t
        for _ in range(n_iter):
            x = np.sqrt(abs(x)) * gen.standard_normal()
        out[r] = x
    return out


def _iterated_point_np(n_iter, t, replicas, gen):
    Z = gen.standard_normal((replicas, n_iter))
    x = np.full(replicas, float(t))
    for k in range(n_iter):
        x = np.sqrt(np.abs(x)) * Z[:, k]
    return x


def iterated_point(n_iter, t, replicas, gen):
    """``W_n(t)`` for ``replicas`` independent stacks of fresh paths."""
    if _backend.USE_NUMBA:
        return _iterated_point_nb(n_iter, float(t), replicas, gen)
    return _iterated_point_np(n_iter, float(t), replicas, gen)


def _grid_oscillation_nb(n_iter, grid, replicas, gen):
    out = np.empty(replicas)
    for r in range(replicas):
        x = grid
        for _ in range(n_iter):
            x = _walk_sorted_nb(x, np.argsort(x), gen)
        out[r] = x.max() - x.min()
    return out


def _grid_oscillation_np(n_iter, grid, replicas, gen):
    out = np.empty(replicas)
    for r in range(replicas):
        x = grid
        for _ in range(n_iter):
            x = _fresh_eval_np(x, gen)
        out[r] = x.max() - x.min()
    return out


def grid_oscillation(n_iter, grid, replicas, gen):
    """max - min of ``W_n`` over ``grid`` for independent fresh stacks."""
    grid = np.ascontiguousarray(grid, dtype=np.float64)
    if _backend.USE_NUMBA:
        return _grid_oscillation_nb(n_iter, grid, replicas, gen)
    return _grid_oscillation_np(n_iter, grid, replicas, gen)


# --------------------------------------------------------------------------
# random-walk ranges

@njit
def _range_product_nb(n_terms, grid_size, replicas, gen):
    sd = np.sqrt(1.0 / (grid_size - 1))
    out = np.empty(replicas)
    for r in range(replicas):
        prod = 1.0
        for i in range(n_terms):
            w = 0.0
            hi = 0.0
            lo = 0.0
            for _ in range(grid_size - 1):
                w += sd * gen.standard_normal()
                if w > hi:
                    hi = w
                elif w < lo:
                    lo = w
            prod *= (hi - lo) ** (0.5 ** i)
        out[r] = prod
    return out


def _range_product_np(n_terms, grid_size, replicas, gen):
    sd = np.sqrt(1.0 / (grid_size - 1))
    steps = grid_size - 1
    chunk = max(1, 4_000_000 // (n_terms * steps))
    expo = 0.5 ** np.arange(n_terms)
    out = np.empty(replicas)
    for start in range(0, replicas, chunk):
        c = min(chunk, replicas - start)
        W = np.cumsum(sd * gen.standard_normal((c, n_terms, steps)), axis=2)
        D = np.maximum(W.max(axis=2), 0.0) - np.minimum(W.min(axis=2), 0.0)
        P = D ** expo
        prod = np.ones(c)
        for i in range(n_terms):
            prod *= P[:, i]
        out[start:start + c] = prod
    return out


def range_product(n_terms, grid_size, replicas, gen):
    """``prod_i D_i ** 2**-i`` with ``D_i`` the range of a grid Brownian walk on [0, 1]."""
    if _backend.USE_NUMBA:
        return _range_product_nb(n_terms, grid_size, replicas, gen)
    return _range_product_np(n_terms, grid_size, replicas, gen)


@njit
def _two_sided_max_abs_nb(half_steps, replicas, gen):
    sd = np.sqrt(1.0 / half_steps)
    out = np.empty(replicas)
    for r in range(replicas):
        best = 0.0
        for _ in range(2):
            w = 0.0
            for _ in range(half_steps):
                w += sd * gen.standard_normal()
                if abs(w) > best:
                    best = abs(w)
        out[r] = best
    return out


def _two_sided_max_abs_np(half_steps, replicas, gen):
    sd = np.sqrt(1.0 / half_steps)
    chunk = max(1, 4_000_000 // (2 * half_steps))
    out = np.empty(replicas)
    for start in range(0, replicas, chunk):
        c = min(chunk, replicas - start)
        W = np.cumsum(sd * gen.standard_normal((c, 2, half_steps)), axis=2)
        out[start:start + c] = np.abs(W).max(axis=(1, 2))
    return out


def two_sided_max_abs(half_steps, replicas, gen):
    """Grid estimate of ``max |B|`` over [-1, 1], ``half_steps`` steps per side."""
    if _backend.USE_NUMBA:
        return _two_sided_max_abs_nb(half_steps, replicas, gen)
    return _two_sided_max_abs_np(half_steps, replicas, gen)
