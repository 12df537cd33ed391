"""The numba kernels and the numpy fallback consume the same random numbers in the same order."""
import numpy as np
import pytest

from iterbm import LazyBrownianPath, _backend, kernels
from iterbm.occupation import oscillation_replicas
from iterbm.rng import RngStream

pytestmark = pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")


def both(fn):
    out = []
    for name in ("numba", "numpy"):
        _backend.set_backend(name)
        out.append(fn())
    return out


def gen():
    return RngStream(1).generator


def _knots():
    r = np.random.default_rng(1)
    kt = np.sort(np.concatenate([[0.0], r.normal(size=50)]))
    kv = r.normal(size=51)
    kv[np.searchsorted(kt, 0.0)] = 0.0
    return kt, kv


@pytest.fixture(autouse=True)
def _restore(restore_backend):
    yield


def test_fill_knots():
    kt, kv = _knots()
    q = np.sort(np.random.default_rng(3).normal(scale=2, size=1000))
    q = q[~np.isin(q, kt)]
    a, b = both(lambda: kernels.fill_knots(kt, kv, q, gen()))
    assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_fresh_eval_with_zero_and_duplicates():
    x = np.random.default_rng(4).normal(size=2000)
    x[5] = 0.0
    x[7] = x[8]
    a, b = both(lambda: kernels.fresh_eval(x, gen()))
    assert a[5] == b[5] == 0.0 and a[7] == a[8]
    assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_chain_rows_bitwise():
    X = np.random.default_rng(5).normal(size=(1000, 3))
    a, b = both(lambda: kernels.chain_rows(X, gen()))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("name,call", [
    ("iterated_point", lambda: kernels.iterated_point(10, 1.0, 500, gen())),
    ("grid_oscillation", lambda: kernels.grid_oscillation(4, np.linspace(0, 1, 1024), 30, gen())),
    ("range_product", lambda: kernels.range_product(5, 100, 50, gen())),
    ("two_sided_max_abs", lambda: kernels.two_sided_max_abs(100, 50, gen())),
])
def test_fused_kernels(name, call):
    a, b = both(call)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12), name


def test_path_object_is_backend_independent():
    ts = np.linspace(-2, 3, 257)

    def run():
        p = LazyBrownianPath(RngStream(9))
        p.evaluate(1.0)
        return p.evaluate_batch(ts)

    a, b = both(run)
    assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_public_sampler_is_backend_independent():
    a, b = both(lambda: oscillation_replicas(3, 1.0, 512, 40, RngStream(2)))
    assert np.allclose(a, b, rtol=1e-12)


def test_set_backend_validates():
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")
    _backend.set_backend("numpy")
    assert _backend.backend_name() == "numpy"
