"""The acceptance checks, shared by ``iterbm selfcheck`` and the test-suite.

Each check takes ``(seed, workers)`` and returns a list of :class:`TestReport`;
a report passes when ``statistic < threshold``. Check ``k`` draws from
stream ``(seed, k)``.
"""
from __future__ import annotations

import math
import time

import numpy as np

from .analysis import (
    TestReport,
    drift_estimate,
    estimate_c1,
    far_states,
    ks_one_sample,
    ks_two_sample,
    lyapunov_V,
    predicted_next_v_single,
    signed_exp_cdf,
)
from .brownian import LazyBrownianPath
from .iterate import (
    IteratedPath,
    sample_limit_marginal,
    sample_limit_oscillation,
    sample_nu_p_batch,
    verify_fixed_point,
)
from .occupation import (
    fourier_second_moment,
    fourier_target,
    local_time_estimate,
    occupation_samples,
    oscillation_on_grid,
    oscillation_replicas,
    p_variation,
)
from .rng import RngStream


def _tag(reports, seed, stream_id):
    for r in reports:
        r.seeds = {"seed": seed, "stream_id": stream_id}
    return reports


def _bound(name, value, target, tol, n):
    """Report for ``|value - target| < tol``."""
    return TestReport(name, abs(value - target), tol, float("nan"), (n,),
                      extra={"value": value, "target": target})


def marginal_limit(seed, workers=1):
    rng = RngStream(seed, 1)
    n = 10 ** 5
    w = np.array([IteratedPath(10, rng).evaluate(1.0) for _ in range(n)])
    r = ks_one_sample(w, signed_exp_cdf, threshold=0.01, name="W_10(1) vs +-E(2)")
    return [r]


def product_representation(seed, workers=1):
    rng = RngStream(seed, 2)
    n = 10 ** 5
    x = sample_limit_marginal(rng, 30, size=n)
    return [
        ks_one_sample(x, signed_exp_cdf, threshold=0.01, name="product law vs +-E(2)"),
        _bound("E|X| = 1/2", math.fsum(np.abs(x)) / n, 0.5, 0.005, n),
        _bound("E[X^2] = 1/2", math.fsum(x * x) / n, 0.5, 0.01, n),
    ]


def fixed_point(seed, workers=1):
    rng = RngStream(seed, 3)
    return [verify_fixed_point(rng, 10 ** 5, threshold=0.01)]


def fourier_formula(seed, workers=1):
    rng = RngStream(seed, 4)
    xis = np.array([0.0, 1.0, 2.0, 5.0])
    est = fourier_second_moment(xis, 10, 2000, 200, rng, workers=workers)
    tgt = fourier_target(xis)
    return [_bound(f"E|Phi({xi:g})|^2 = {t:.6f}", float(e), float(t), 0.02, 2000)
            for xi, e, t in zip(xis, est, tgt)]


def increment_stationarity(seed, workers=1):
    rng = RngStream(seed, 5)
    X = sample_nu_p_batch((1.0, 2.0), 12, 10 ** 4, rng, workers=workers)
    return [ks_one_sample(X[:, 0] - X[:, 1], signed_exp_cdf, threshold=0.02,
                          name="X_1 - X_2 under nu_2 vs +-E(2)")]


def start_independence(seed, workers=1):
    rng = RngStream(seed, 6)
    A = sample_nu_p_batch((1.0, 2.0), 12, 10 ** 4, rng, workers=workers)
    B = sample_nu_p_batch((-5.0, 0.1), 12, 10 ** 4, rng, workers=workers)
    return [
        ks_two_sample(A[:, 0], B[:, 0], threshold=0.03, name="X_1 from (1,2) vs (-5,0.1)"),
        ks_two_sample(A[:, 0], A[:, 1], threshold=0.03, name="X_1 vs X_2 (exchangeability)"),
    ]


def self_similarity(seed, workers=1):
    rng = RngStream(seed, 7)
    n = 10 ** 4
    a = np.array([IteratedPath(8, rng).evaluate(3.0) for _ in range(n)]) / 3.0 ** (2.0 ** -8)
    b = np.array([IteratedPath(8, rng).evaluate(1.0) for _ in range(n)])
    return [ks_two_sample(a, b, threshold=0.02, name="W_8(3)/3^(1/256) vs W_8(1)")]


def path_oracle(seed, workers=1):
    rng = RngStream(seed, 8)
    n = 10 ** 5
    b3 = np.empty(n)
    b8 = np.empty(n)
    b1 = np.empty(n)
    for i in range(n):
        p = LazyBrownianPath(rng.fork())
        b3[i] = p.evaluate(0.3)
        b8[i] = p.evaluate(0.8)
        b1[i] = p.evaluate(1.0)
    cov = math.fsum((b3 - b3.mean()) * (b8 - b8.mean())) / (n - 1)
    var = math.fsum((b1 - b1.mean()) ** 2) / (n - 1)
    direct = np.empty(n)
    bridged = np.empty(n)
    for i in range(n):
        direct[i] = LazyBrownianPath(rng.fork()).evaluate(0.5)
        p = LazyBrownianPath(rng.fork())
        p.evaluate(0.25)
        p.evaluate(0.75)
        bridged[i] = p.evaluate(0.5)
    return [
        _bound("Cov(B(0.3), B(0.8)) = 0.3", cov, 0.3, 0.02, n),
        _bound("Var(B(1)) = 1", var, 1.0, 0.02, n),
        ks_two_sample(direct, bridged, threshold=0.02, name="B(0.5) direct vs after 0.25, 0.75"),
    ]


def oscillation_limit(seed, workers=1):
    rng = RngStream(seed, 9)
    grid = 2 ** 14
    a = oscillation_replicas(8, 1.0, grid, 10 ** 4, rng, workers=workers)
    b = sample_limit_oscillation(rng, 30, grid, size=10 ** 4, workers=workers)
    return [ks_two_sample(a, b, threshold=0.05, name="osc(W_8; [0,1]) vs prod D_i^(2^-i)")]


def variation_dichotomy(seed, workers=1):
    rng = RngStream(seed, 10)
    levels = list(range(8, 15))
    quad = np.empty((100, len(levels)))
    quart = np.empty((100, len(levels)))
    for i in range(100):
        ip = IteratedPath(2, rng)
        quad[i] = p_variation(2, 2.0, levels, rng, path=ip)
        quart[i] = p_variation(2, 4.0, levels, rng, path=ip)
    mq = np.median(quad, axis=0)
    m4 = np.median(quart, axis=0)
    growth = TestReport("quadratic variation of W_2 strictly increasing (max ratio k/k+1)",
                        float(np.max(mq[:-1] / mq[1:])), 1.0, float("nan"), (100,),
                        extra={"levels": levels, "medians": mq.tolist()})
    spread = TestReport("quartic variation of W_2 within a factor 2 (max/min)",
                        float(m4.max() / m4.min()), 2.0, float("nan"), (100,),
                        extra={"levels": levels, "medians": m4.tolist()})
    return [growth, spread]


def drift_condition(seed, workers=1):
    rng = RngStream(seed, 11)
    c1, c1_se = estimate_c1(seed)
    reports = []
    for k, x in enumerate(far_states(20, rng, c1)):
        d = drift_estimate(x, 20_000, rng, workers=workers)
        reports.append(TestReport(f"state {k} (p={x.size}, V={d.v_start:.4g}): drift + 3 se < 0",
                                  d.upper(3.0), 0.0, float("nan"), (d.replicas,),
                                  extra={"x": x.tolist(), "drift": d.drift, "stderr": d.stderr,
                                         "C1": c1, "C1_stderr": c1_se}))
    d = drift_estimate((100.0,), 10 ** 5, rng, workers=workers)
    pred = predicted_next_v_single(100.0) - lyapunov_V((100.0,))
    reports.append(TestReport("x=(100): |drift - closed form| / se < 3",
                              abs(d.drift - pred) / d.stderr, 3.0, float("nan"), (d.replicas,),
                              extra={"drift": d.drift, "predicted": pred, "stderr": d.stderr}))
    return reports


def occupation_support(seed, workers=1):
    rng = RngStream(seed, 12)
    grid = np.linspace(0.0, 1.0, 2 ** 12)
    mass_err = 0.0
    width_err = 0.0
    for _ in range(20):
        ip = IteratedPath(10, rng)
        est = local_time_estimate(ip.evaluate_batch(grid), 100)
        osc = oscillation_on_grid(10, 1.0, grid.size, rng, path=ip)
        mass_err = max(mass_err, abs(est.total_mass - 1.0))
        width_err = max(width_err, abs((est.support_hi - est.support_lo) - osc))
        rand = local_time_estimate(occupation_samples(10, 10 ** 4, rng), 100)
        mass_err = max(mass_err, abs(rand.total_mass - 1.0))
    return [
        TestReport("occupation estimates have mass 1", mass_err, 1e-12, float("nan"), (40,)),
        TestReport("support width equals grid oscillation", width_err, 1e-12, float("nan"), (20,)),
    ]


CRITERIA = [
    (1, "Marginal limit", marginal_limit),
    (2, "Product representation", product_representation),
    (3, "Fixed point", fixed_point),
    (4, "Fourier formula", fourier_formula),
    (5, "Increment stationarity", increment_stationarity),
    (6, "Start independence & exchangeability", start_independence),
    (7, "Self-similarity", self_similarity),
    (8, "Path-oracle law", path_oracle),
    (9, "Oscillation limit", oscillation_limit),
    (10, "Variation dichotomy", variation_dichotomy),
    (11, "Drift condition", drift_condition),
    (12, "Occupation normalization & support", occupation_support),
]


def run_criterion(number, seed=42, workers=1):
    _, title, func = CRITERIA[number - 1]
    t0 = time.perf_counter()
    reports = _tag(func(seed, workers), seed, number)
    return title, reports, time.perf_counter() - t0


def format_line(number, title, report):
    status = "PASS" if report.passed else "FAIL"
    return (f"[{status}] criterion {number:2d} {title}: {report.name}: "
            f"{report.statistic:.6g} < {report.threshold:.6g}")
