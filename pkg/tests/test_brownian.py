import math

import numpy as np
import pytest
from scipy import stats

from iterbm import LazyBrownianPath
from iterbm.brownian import evaluate, evaluate_batch
from iterbm.io import read_csv
from iterbm.rng import RngStream


def test_pinned_at_origin(stream):
    p = LazyBrownianPath(stream())
    assert p.evaluate(0.0) == 0.0
    assert np.array_equal(LazyBrownianPath(stream()).evaluate_batch([0.0]), [0.0])


def test_cache_consistency(stream):
    p = LazyBrownianPath(stream())
    v = p.evaluate(0.7)
    p.evaluate(0.2)
    p.evaluate(-3.0)
    assert p.evaluate(0.7) == v
    assert p.evaluate_batch([0.7])[0] == v


def test_batch_duplicates(stream):
    out = LazyBrownianPath(stream()).evaluate_batch([0.5, -1.0, 0.5, 2.0, -1.0])
    assert out[0] == out[2] and out[1] == out[4]


def test_batch_preserves_shape(stream):
    out = LazyBrownianPath(stream()).evaluate_batch(np.linspace(-1, 1, 12).reshape(3, 4))
    assert out.shape == (3, 4)
    assert LazyBrownianPath(stream()).evaluate_batch([]).shape == (0,)


def test_knots_sorted_and_counted(stream):
    p = LazyBrownianPath(stream())
    p.evaluate_batch([3.0, -2.0, 0.5])
    p.evaluate(1.0)
    t, v = p.knots
    assert np.all(np.diff(t) > 0)
    assert len(p) == 5
    assert v[np.searchsorted(t, 0.0)] == 0.0


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_rejected(stream, bad):
    p = LazyBrownianPath(stream())
    with pytest.raises(ValueError):
        p.evaluate(bad)
    with pytest.raises(ValueError):
        p.evaluate_batch([1.0, bad])


def test_module_level_helpers(stream):
    p = LazyBrownianPath(stream())
    assert evaluate(p, 1.5) == evaluate_batch(p, [1.5])[0]


def test_single_and_batch_draw_the_same_numbers():
    ts = [1.0, -2.0, 0.5, 3.0, -0.1, 0.75]
    a = LazyBrownianPath(RngStream(9))
    b = LazyBrownianPath(RngStream(9))
    for t in ts:
        assert a.evaluate(t) == pytest.approx(b.evaluate_batch([t])[0], abs=1e-14)


def test_csv_dump(stream, tmp_path):
    p = LazyBrownianPath(stream())
    p.evaluate_batch([0.3, -0.4, 2.0])
    p.to_csv(tmp_path / "k.csv")
    header, rows = read_csv(tmp_path / "k.csv")
    assert header == ["time", "value"]
    t, v = p.knots
    assert np.array_equal(rows[:, 0], t) and np.array_equal(rows[:, 1], v)


# --- law of the path ---------------------------------------------------------

def _many(stream_id, n, ts, batch):
    rng = RngStream(77, stream_id)
    out = np.empty((n, len(ts)))
    for i in range(n):
        p = LazyBrownianPath(rng.fork())
        out[i] = p.evaluate_batch(ts) if batch else [p.evaluate(t) for t in ts]
    return out


@pytest.mark.slow
def test_covariance_and_variance():
    x = _many(1, 10 ** 5, [0.3, 0.8, 1.0], batch=False)
    c = np.cov(x, rowvar=False)
    assert abs(c[2, 2] - 1.0) < 0.02
    assert abs(c[0, 1] - 0.3) < 0.02


@pytest.mark.slow
def test_batch_covariance_matches_min():
    ts = [-1.0, -0.25, 0.5, 2.0]
    x = _many(2, 4 * 10 ** 4, ts, batch=True)
    c = np.cov(x, rowvar=False)
    want = np.array([[min(abs(s), abs(t)) if s * t > 0 else 0.0 for t in ts] for s in ts])
    assert np.max(np.abs(c - want)) < 0.06


@pytest.mark.slow
def test_half_lines_independent():
    n = 10 ** 5
    x = _many(3, n, [-0.5, 0.7], batch=False)
    assert abs(np.corrcoef(x[:, 0], x[:, 1])[0, 1]) < 3 / math.sqrt(n)


@pytest.mark.slow
def test_query_order_does_not_change_law():
    n = 10 ** 4
    rng = RngStream(77, 4)
    direct = np.array([LazyBrownianPath(rng.fork()).evaluate(0.5) for _ in range(n)])
    bridged = np.empty(n)
    for i in range(n):
        p = LazyBrownianPath(rng.fork())
        p.evaluate(1.0)
        p.evaluate(0.25)
        bridged[i] = p.evaluate(0.5)
    assert stats.ks_2samp(direct, bridged).statistic < 0.02


@pytest.mark.slow
def test_bridge_conditional_law():
    # given B(0.2) and B(1), B(0.6) - mean has variance 0.4 * 0.4 / 0.8
    n = 4 * 10 ** 4
    rng = RngStream(77, 5)
    r = np.empty(n)
    for i in range(n):
        p = LazyBrownianPath(rng.fork())
        a, b = p.evaluate(0.2), p.evaluate(1.0)
        r[i] = p.evaluate(0.6) - (a + b) / 2
    assert stats.kstest(r / math.sqrt(0.2), "norm").statistic < 0.01
