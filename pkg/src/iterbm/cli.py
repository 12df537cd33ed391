"""Command-line experiments.

Every subcommand writes plot-ready CSV files and a JSON report bundle into
``--out``. Exit status: 0 if every check passed, 1 if a check failed, 2 for
usage or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, acceptance
from ._backend import backend_name
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
from .io import write_columns, write_csv, write_json
from .iterate import (
    IteratedPath,
    PointVector,
    sample_iterated_point,
    sample_limit_marginal,
    sample_limit_oscillation,
    sample_nu_p_batch,
    verify_fixed_point,
)
from .occupation import (
    fourier_second_moment,
    fourier_target,
    gaussian_time_law,
    local_time_estimate,
    occupation_samples,
    oscillation_replicas,
    p_variation,
    uniform_time_law,
)
from .parallel import default_workers
from .rng import RngStream, default_seed

log = logging.getLogger("iterbm")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    out: str = "results"
    workers: int = 1
    params: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["params"][name]
        except KeyError:
            raise AttributeError(name) from None


# per-subcommand defaults; every key is also a flag (underscores -> dashes)
DEFAULTS = {
    "marginal": dict(n=10, t=1.0, samples=10 ** 5, threshold=0.01),
    "nu-p": dict(start="1,2", steps=12, samples=10 ** 4, threshold=0.02),
    "seastar": dict(start="1,2", steps=12, samples=300_000, threshold=0.01),
    "occupation": dict(n=10, paths=10 ** 4, samples=10, time_law="uniform", threshold=0.01),
    "local-time": dict(n=10, samples=10 ** 5, bins=100, time_law="uniform", exponent=0.4),
    "fourier": dict(n=10, xis="0,1,2,5", replicas=2000, points=200, tolerance=0.02),
    "oscillation": dict(n=8, t=1.0, grid=2 ** 14, replicas=10 ** 4, terms=30, threshold=0.05),
    "variation": dict(n=2, orders="2,4", levels="8-14", paths=100),
    "drift": dict(states=20, replicas=20_000, c1_replicas=10 ** 4, c1_grid=2 ** 16),
    "fixed-point": dict(samples=10 ** 5, terms=30, threshold=0.01),
    "selfcheck": dict(criteria="1-12"),
}

HELP = {
    "marginal": "W_n(t) samples vs the signed exponential law",
    "nu-p": "stationary law of the p-point chain",
    "seastar": "2-point stationary samples for a density plot",
    "occupation": "pooled occupation-measure samples",
    "local-time": "histogram local time of one path",
    "fourier": "E|Phi(xi)|^2 sweep against 4/(4+xi^2)",
    "oscillation": "grid oscillation of W_n vs the product limit",
    "variation": "dyadic p-variations of W_n",
    "drift": "Lyapunov drift of the p-point chain",
    "fixed-point": "distributional fixed point X = sqrt(X)|N|",
    "selfcheck": "run the acceptance suite",
}


def _floats(s):
    try:
        return [float(v) for v in str(s).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {s!r}") from None


def _levels(s):
    s = str(s)
    try:
        if "-" in s:
            a, b = s.split("-")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in s.split(",")]
    except ValueError:
        raise UsageError(f"bad level range {s!r}") from None


def _time_law(name):
    if name == "uniform":
        return uniform_time_law()
    if name == "gaussian":
        return gaussian_time_law()
    raise UsageError(f"unknown time law {name!r} (uniform, gaussian)")


def _positive(cfg, *names):
    for k in names:
        if not cfg.params[k] > 0:
            raise UsageError(f"--{k.replace('_', '-')} must be positive")


def _report(name, statistic, threshold, n, **extra):
    return TestReport(name, float(statistic), float(threshold), float("nan"), (n,), extra=extra)


# --------------------------------------------------------------------------
# experiments: each returns a list of TestReport and writes its CSV files

def run_marginal(cfg, rng):
    _positive(cfg, "n", "samples", "threshold")
    w = sample_iterated_point(int(cfg.n), cfg.t, int(cfg.samples), rng, workers=cfg.workers)
    write_columns(os.path.join(cfg.out, "marginal_samples.csv"), ["value"], w)
    return [ks_one_sample(w, signed_exp_cdf, cfg.threshold, f"W_{cfg.n}({cfg.t:g}) vs +-E(2)")]


def _start(cfg):
    try:
        return PointVector(_floats(cfg.start))
    except ValueError as e:
        raise UsageError(str(e)) from None


def run_nu_p(cfg, rng):
    _positive(cfg, "steps", "samples", "threshold")
    x0 = _start(cfg)
    X = sample_nu_p_batch(x0, int(cfg.steps), int(cfg.samples), rng, workers=cfg.workers)
    p = X.shape[1]
    write_columns(os.path.join(cfg.out, "nu_p_samples.csv"),
                  [f"x{i + 1}" for i in range(p)], *X.T)
    reps = [ks_one_sample(X[:, i], signed_exp_cdf, cfg.threshold, f"X_{i + 1} vs +-E(2)")
            for i in range(p)]
    reps += [ks_one_sample(X[:, i] - X[:, j], signed_exp_cdf, cfg.threshold,
                           f"X_{i + 1} - X_{j + 1} vs +-E(2)")
             for i in range(p) for j in range(i + 1, p)]
    return reps


def run_seastar(cfg, rng):
    _positive(cfg, "steps", "samples", "threshold")
    x0 = _start(cfg)
    if len(x0) != 2:
        raise UsageError("seastar needs a 2-point start")
    X = sample_nu_p_batch(x0, int(cfg.steps), int(cfg.samples), rng, workers=cfg.workers)
    write_columns(os.path.join(cfg.out, "seastar.csv"), ["x1", "x2"], X[:, 0], X[:, 1])
    return [ks_one_sample(X[:, 0] - X[:, 1], signed_exp_cdf, cfg.threshold,
                          "X_1 - X_2 vs +-E(2)")]


def run_occupation(cfg, rng):
    _positive(cfg, "n", "paths", "samples", "threshold")
    law = _time_law(cfg.time_law)
    pooled = np.concatenate([occupation_samples(int(cfg.n), int(cfg.samples), rng, law)
                             for _ in range(int(cfg.paths))])
    write_columns(os.path.join(cfg.out, "occupation_samples.csv"), ["value"], pooled)
    return [ks_one_sample(pooled, signed_exp_cdf, cfg.threshold, "pooled occupation vs +-E(2)")]


def run_local_time(cfg, rng):
    _positive(cfg, "n", "samples", "bins")
    if int(cfg.bins) < 2:
        raise UsageError("--bins must be >= 2")
    w = occupation_samples(int(cfg.n), int(cfg.samples), rng, _time_law(cfg.time_law))
    est = local_time_estimate(w, int(cfg.bins))
    write_csv(os.path.join(cfg.out, "local_time.csv"), ["bin_lo", "bin_hi", "mass"], est.to_rows())
    hq = est.holder_quotients(cfg.exponent)
    rep = _report("histogram mass equals 1", abs(est.total_mass - 1.0), 1e-12, int(cfg.samples),
                  support=[est.support_lo, est.support_hi], degenerate=est.degenerate,
                  holder_exponent=cfg.exponent,
                  holder_quotient_max=float(hq.max()) if hq.size else 0.0,
                  holder_quotient_median=float(np.median(hq)) if hq.size else 0.0)
    return [rep]


def run_fourier(cfg, rng):
    _positive(cfg, "n", "replicas", "tolerance")
    if int(cfg.points) < 2:
        raise UsageError("--points must be >= 2")
    xis = np.array(_floats(cfg.xis))
    if xis.size == 0:
        raise UsageError("--xis is empty")
    est = fourier_second_moment(xis, int(cfg.n), int(cfg.replicas), int(cfg.points), rng,
                                workers=cfg.workers)
    tgt = fourier_target(xis)
    err = np.abs(est - tgt)
    write_columns(os.path.join(cfg.out, "fourier.csv"), ["xi", "estimate", "target", "abs_error"],
                  xis, est, tgt, err)
    return [_report(f"|E|Phi({x:g})|^2 - 4/(4+xi^2)|", e, cfg.tolerance, int(cfg.replicas),
                    estimate=float(s), target=float(t))
            for x, e, s, t in zip(xis, err, est, tgt)]


def run_oscillation(cfg, rng):
    _positive(cfg, "n", "t", "replicas", "terms", "threshold")
    if int(cfg.grid) < 2:
        raise UsageError("--grid must be >= 2")
    a = oscillation_replicas(int(cfg.n), cfg.t, int(cfg.grid), int(cfg.replicas), rng,
                             workers=cfg.workers)
    b = sample_limit_oscillation(rng, int(cfg.terms), int(cfg.grid), size=int(cfg.replicas),
                                 workers=cfg.workers)
    write_columns(os.path.join(cfg.out, "oscillation.csv"), ["iterated", "product_limit"], a, b)
    return [ks_two_sample(a, b, cfg.threshold, "grid oscillation vs product limit")]


def run_variation(cfg, rng):
    _positive(cfg, "n", "paths")
    orders = _floats(cfg.orders)
    levels = _levels(cfg.levels)
    if any(o <= 0 for o in orders) or not levels:
        raise UsageError("orders must be positive and levels non-empty")
    vals = np.empty((int(cfg.paths), len(orders), len(levels)))
    for i in range(int(cfg.paths)):
        ip = IteratedPath(int(cfg.n), rng)
        for j, o in enumerate(orders):
            vals[i, j] = p_variation(int(cfg.n), o, levels, rng, path=ip)
    med = np.median(vals, axis=0)
    rows = [(k, o, float(med[j, li])) for j, o in enumerate(orders) for li, k in enumerate(levels)]
    write_csv(os.path.join(cfg.out, "variation.csv"), ["level", "order", "median"], rows)
    critical = 2.0 ** int(cfg.n)
    reps = []
    for j, o in enumerate(orders):
        m = med[j]
        if o == critical:
            reps.append(_report(f"order {o:g} variation stable (max/min)", m.max() / m.min(), 2.0,
                                int(cfg.paths), medians=m.tolist()))
        elif o < critical and len(levels) > 1:
            reps.append(_report(f"order {o:g} variation increasing (max ratio k/k+1)",
                                np.max(m[:-1] / m[1:]), 1.0, int(cfg.paths), medians=m.tolist()))
    return reps


def run_drift(cfg, rng):
    _positive(cfg, "states", "replicas", "c1_replicas", "c1_grid")
    if int(cfg.replicas) < 100:
        raise UsageError("--replicas must be >= 100")
    c1, _ = estimate_c1(cfg.seed, int(cfg.c1_grid), int(cfg.c1_replicas))
    rows, reps = [], []
    for x in far_states(int(cfg.states), rng, c1):
        d = drift_estimate(x, int(cfg.replicas), rng, workers=cfg.workers)
        rows.append((x.size, " ".join("%.17g" % v for v in x), d.v_start, d.drift, d.stderr))
        reps.append(_report(f"drift from V={d.v_start:.4g} negative (drift + 3 se)",
                            d.upper(3.0), 0.0, int(cfg.replicas), x=x.tolist()))
    d = drift_estimate((100.0,), int(cfg.replicas), rng, workers=cfg.workers)
    pred = predicted_next_v_single(100.0) - lyapunov_V((100.0,))
    rows.append((1, "100", d.v_start, d.drift, d.stderr))
    reps.append(_report("x=(100) drift vs closed form (|diff|/se)", abs(d.drift - pred) / d.stderr,
                        3.0, int(cfg.replicas), predicted=pred, estimate=d.drift))
    write_csv(os.path.join(cfg.out, "drift.csv"), ["p", "state", "V", "drift", "stderr"], rows)
    return reps


def run_fixed_point(cfg, rng):
    _positive(cfg, "samples", "terms", "threshold")
    if int(cfg.samples) < 10 ** 4:
        raise UsageError("--samples must be at least 10000")
    rep = verify_fixed_point(rng, int(cfg.samples), threshold=cfg.threshold)
    x = sample_limit_marginal(rng, int(cfg.terms), size=int(cfg.samples))
    write_columns(os.path.join(cfg.out, "limit_samples.csv"), ["value"], x)
    return [rep]


def run_selfcheck(cfg, rng):
    wanted = _levels(cfg.criteria)
    if any(k < 1 or k > len(acceptance.CRITERIA) for k in wanted):
        raise UsageError(f"criteria must lie in 1..{len(acceptance.CRITERIA)}")
    out = []
    for k in wanted:
        title, reps, dt = acceptance.run_criterion(k, cfg.seed, cfg.workers)
        for r in reps:
            print(acceptance.format_line(k, title, r), flush=True)
            r.extra["criterion"] = k
            r.extra["seconds"] = dt
        out.extend(reps)
    return out


RUNNERS = {
    "marginal": run_marginal,
    "nu-p": run_nu_p,
    "seastar": run_seastar,
    "occupation": run_occupation,
    "local-time": run_local_time,
    "fourier": run_fourier,
    "oscillation": run_oscillation,
    "variation": run_variation,
    "drift": run_drift,
    "fixed-point": run_fixed_point,
    "selfcheck": run_selfcheck,
}

# stream ids keep experiments independent under a shared seed
STREAM_IDS = {name: 100 + i for i, name in enumerate(RUNNERS)}


# --------------------------------------------------------------------------

def _coerce(value, default):
    if isinstance(default, bool):
        return bool(value)
    if isinstance(default, int):
        f = float(value)
        if f != int(f):
            raise UsageError(f"expected an integer, got {value!r}")
        return int(f)
    if isinstance(default, float):
        return float(value)
    return str(value)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=lambda s: int(s, 0), default=argparse.SUPPRESS,
                        help="base seed (default: $ITERBM_SEED or 42)")
    common.add_argument("--config", default=None, help="JSON file of parameters; flags override it")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default: results)")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                        help="worker processes (default: available CPUs)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="iterbm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, defaults in DEFAULTS.items():
        sp = sub.add_parser(name, parents=[common], help=HELP[name])
        for key, val in defaults.items():
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=str,
                            default=argparse.SUPPRESS, help=f"(default: {val})")
    return parser


def make_config(args) -> ExperimentConfig:
    ns = vars(args)
    name = ns["experiment"]
    file_params = {}
    if ns.get("config"):
        with open(ns["config"]) as fh:
            file_params = json.load(fh)
        if not isinstance(file_params, dict):
            raise UsageError("config file must hold a JSON object")
    defaults = DEFAULTS[name]
    unknown = set(file_params) - set(defaults) - {"seed", "out", "workers"}
    if unknown:
        raise UsageError(f"unknown config keys for {name}: {sorted(unknown)}")
    params = {}
    for key, default in defaults.items():
        raw = ns.get(key, file_params.get(key, default))
        try:
            params[key] = _coerce(raw, default)
        except ValueError:
            raise UsageError(f"bad value for --{key}: {raw!r}") from None
    seed = ns.get("seed", file_params.get("seed"))
    seed = default_seed() if seed is None else int(seed)
    out = ns.get("out", file_params.get("out", "results"))
    workers = int(ns.get("workers", file_params.get("workers", default_workers())))
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    return ExperimentConfig(name, seed, out, workers, params)


def run(cfg: ExperimentConfig) -> int:
    rng = RngStream(cfg.seed, STREAM_IDS[cfg.experiment])
    reports = RUNNERS[cfg.experiment](cfg, rng)
    for r in reports:
        r.seeds = r.seeds or {"seed": cfg.seed, "stream_id": STREAM_IDS[cfg.experiment]}
    ok = all(r.passed for r in reports)
    bundle = {
        "experiment": cfg.experiment,
        "config": asdict(cfg),
        "backend": backend_name(),
        "version": __version__,
        "pass": ok,
        "reports": [_clean(r.to_dict()) for r in reports],
    }
    write_json(os.path.join(cfg.out, f"{cfg.experiment}_report.json"), bundle)
    if cfg.experiment != "selfcheck":
        for r in reports:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.statistic:.6g} < {r.threshold:.6g}")
    return EXIT_PASS if ok else EXIT_FAIL


def _clean(d):
    # JSON has no NaN
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        log.info("running %s with seed %d on %s backend", cfg.experiment, cfg.seed, backend_name())
        return run(cfg)
    except UsageError as e:
        print(f"iterbm {args.experiment}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as e:
        print(f"iterbm {args.experiment}: I/O error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
