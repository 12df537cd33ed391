import math

import numpy as np
import pytest
from scipy import stats

from iterbm import IteratedPath, PointVector, chain_step, sample_nu_p
from iterbm.analysis import signed_exp_cdf
from iterbm.iterate import (
    chain_step_batch,
    eval_iterated,
    in_state_space,
    sample_iterated_point,
    sample_limit_marginal,
    sample_limit_oscillation,
    sample_nu_p_batch,
    verify_fixed_point,
)
from iterbm.occupation import oscillation_replicas
from iterbm.rng import RngStream


# --- IteratedPath -------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5, 10])
def test_origin_is_fixed(stream, n):
    assert IteratedPath(n, stream()).evaluate(0.0) == 0.0


def test_level_one_is_a_brownian_motion(stream):
    ip = IteratedPath(1, stream())
    assert ip.n == 1
    assert ip.evaluate(0.4) == ip.levels[0].evaluate(0.4)


def test_composition_is_consistent(stream):
    ip = IteratedPath(3, stream())
    v = ip.evaluate(0.9)
    x = 0.9
    for level in ip.levels:
        x = level.evaluate(x)
    assert x == v
    assert eval_iterated(ip, 0.9) == v
    assert ip.evaluate_batch([0.9, 0.0])[0] == v


def test_invalid_depth(stream):
    with pytest.raises(ValueError):
        IteratedPath(0, stream())


def test_vectorized_sampler_matches_levels_in_law():
    a = sample_iterated_point(3, 1.0, 20_000, RngStream(5, 1))
    rng = RngStream(5, 2)
    b = np.array([IteratedPath(3, rng).evaluate(1.0) for _ in range(20_000)])
    assert stats.ks_2samp(a, b).statistic < 0.03


@pytest.mark.slow
def test_depth_one_is_gaussian():
    w = sample_iterated_point(1, 1.0, 10 ** 5, RngStream(5, 3))
    assert stats.kstest(w, "norm").statistic < 0.01


@pytest.mark.slow
def test_depth_ten_is_signed_exponential():
    w = sample_iterated_point(10, 1.0, 10 ** 5, RngStream(5, 4))
    assert stats.kstest(w, signed_exp_cdf).statistic < 0.01


def test_sample_iterated_point_zero_time():
    assert np.all(sample_iterated_point(4, 0.0, 100, RngStream(1)) == 0.0)


# --- state space and chain ------------------------------------------------------

@pytest.mark.parametrize("x,ok", [
    ((1.0, 2.0), True),
    ((), True),
    ((0.0, 1.0), False),
    ((1.0, 1.0), False),
    ((1.0, math.nan), False),
    ((math.inf,), False),
])
def test_in_state_space(x, ok):
    assert in_state_space(x) is ok


def test_point_vector_validation_and_immutability():
    pv = PointVector([2.0, -1.0])
    assert len(pv) == 2 and list(pv) == [2.0, -1.0]
    with pytest.raises(ValueError):
        pv.coords[0] = 5.0
    with pytest.raises(ValueError):
        PointVector([1.0, 1.0])
    assert pv == PointVector((2.0, -1.0))


def test_empty_chain_step(stream):
    assert len(chain_step((), stream())) == 0


def test_chain_step_returns_state(stream):
    y = chain_step((1.0, 2.0, -3.0), stream())
    assert isinstance(y, PointVector) and len(y) == 3


def test_chain_step_batch_shape(stream):
    Y = chain_step_batch(np.tile([1.0, 2.0], (7, 1)), stream())
    assert Y.shape == (7, 2)
    with pytest.raises(ValueError):
        chain_step_batch(np.ones(3), stream())


@pytest.mark.slow
def test_chain_increment_over_unit_gap():
    Y = chain_step_batch(np.tile([1.0, 2.0], (10 ** 5, 1)), RngStream(6, 1))
    assert stats.kstest(Y[:, 1] - Y[:, 0], "norm").statistic < 0.01


@pytest.mark.slow
def test_chain_opposite_half_lines_uncorrelated():
    Y = chain_step_batch(np.tile([-1.0, 1.0], (10 ** 5, 1)), RngStream(6, 2))
    assert abs(np.cov(Y, rowvar=False)[0, 1]) < 0.02


def test_single_sample_nu_p(stream):
    assert len(sample_nu_p((1.0, 2.0), 12, stream())) == 2
    with pytest.raises(ValueError):
        sample_nu_p((1.0, 1.0), 3, stream())


def test_nu_p_batch_worker_invariance():
    a = sample_nu_p_batch((1.0, 2.0), 5, 300, RngStream(3), workers=1, block_size=64)
    b = sample_nu_p_batch((1.0, 2.0), 5, 300, RngStream(3), workers=2, block_size=64)
    assert np.array_equal(a, b)


@pytest.mark.slow
def test_nu_1_marginal():
    X = sample_nu_p_batch((1.0,), 12, 10 ** 5, RngStream(6, 3))
    assert stats.kstest(X[:, 0], signed_exp_cdf).statistic < 0.01


@pytest.mark.slow
def test_nu_2_difference_and_start_independence():
    A = sample_nu_p_batch((1.0, 2.0), 12, 10 ** 4, RngStream(6, 4))
    B = sample_nu_p_batch((-5.0, 0.1), 12, 10 ** 4, RngStream(6, 5))
    assert stats.kstest(A[:, 0] - A[:, 1], signed_exp_cdf).statistic < 0.02
    assert stats.ks_2samp(A[:, 0], B[:, 0]).statistic < 0.03


# --- limit laws ---------------------------------------------------------------

def test_limit_marginal_scalar_and_shape(stream):
    assert isinstance(sample_limit_marginal(stream()), float)
    assert sample_limit_marginal(stream(), size=(3, 4)).shape == (3, 4)
    with pytest.raises(ValueError):
        sample_limit_marginal(stream(), n_terms=0)


def test_limit_marginal_one_term_is_signed_half_normal(stream):
    x = sample_limit_marginal(stream(), n_terms=1, size=50_000)
    assert stats.kstest(x, "norm").statistic < 0.01


@pytest.mark.slow
def test_limit_marginal_moments():
    x = sample_limit_marginal(RngStream(8, 1), size=10 ** 6)
    assert abs(math.fsum(x) / x.size) < 0.005
    assert abs(math.fsum(np.abs(x)) / x.size - 0.5) < 0.005


def test_limit_marginal_ks():
    x = sample_limit_marginal(RngStream(8, 2), size=10 ** 5)
    assert stats.kstest(x, signed_exp_cdf).statistic < 0.01


def test_fixed_point_holds():
    assert verify_fixed_point(RngStream(8, 3), 10 ** 5).passed


def test_fixed_point_rejects_half_normal():
    rng = RngStream(8, 4)
    bad = np.abs(rng.normal(10 ** 4))
    rep = verify_fixed_point(rng, 10 ** 4, candidate=bad)
    assert rep.statistic > 0.05 and not rep.passed


def test_fixed_point_replay_and_guards():
    a = verify_fixed_point(RngStream(8, 5), 10 ** 4)
    b = verify_fixed_point(RngStream(8, 5), 10 ** 4)
    assert a.statistic == b.statistic
    with pytest.raises(ValueError):
        verify_fixed_point(RngStream(8, 5), 100)
    with pytest.raises(ValueError):
        verify_fixed_point(RngStream(8, 5), 10 ** 4, candidate=np.ones(5))


def test_limit_oscillation_positive(stream):
    x = sample_limit_oscillation(stream(), 5, 256, size=50)
    assert np.all(x > 0)
    assert sample_limit_oscillation(stream(), 3, 64) > 0
    with pytest.raises(ValueError):
        sample_limit_oscillation(stream(), 3, 1)


@pytest.mark.slow
def test_one_term_oscillation_grid_refinement():
    coarse = sample_limit_oscillation(RngStream(8, 6), 1, 2 ** 14, size=10 ** 4)
    fine = sample_limit_oscillation(RngStream(8, 7), 1, 2 ** 16, size=10 ** 4)
    assert abs(coarse.mean() / fine.mean() - 1.0) < 0.03


@pytest.mark.slow
def test_iterated_oscillation_matches_product_limit():
    a = oscillation_replicas(8, 1.0, 2 ** 14, 10 ** 4, RngStream(8, 8))
    b = sample_limit_oscillation(RngStream(8, 9), 30, 2 ** 14, size=10 ** 4)
    assert stats.ks_2samp(a, b).statistic < 0.05


@pytest.mark.slow
def test_iterated_grid_deficit_shrinks_with_refinement():
    # the grid estimator of an iterated oscillation undershoots; refining the grid closes the gap
    gaps = []
    for g in (2 ** 10, 2 ** 14):
        a = oscillation_replicas(3, 1.0, g, 4000, RngStream(8, 10 + g))
        b = sample_limit_oscillation(RngStream(8, 20 + g), 3, g, size=4000)
        gaps.append(b.mean() - a.mean())
    assert gaps[0] > 0 and gaps[1] < gaps[0]
