"""Time each hot kernel under the numba and numpy backends.

    python3 benchmarks/bench_backends.py [--repeat 5] [--json out.json]

The first numba call of each kernel includes compilation (or a cache load); it
is reported separately and excluded from the timed repeats.
"""
import argparse
import json
import statistics
import time

import numpy as np

from iterbm import _backend, kernels
from iterbm.rng import RngStream

GRID = np.linspace(0.0, 1.0, 2 ** 14)
X3 = np.random.default_rng(0).normal(size=(20_000, 3))
KT = np.concatenate([[0.0], np.linspace(0.01, 5.0, 200)])
KV = np.concatenate([[0.0], np.random.default_rng(1).normal(size=200).cumsum()])
Q = np.setdiff1d(np.linspace(-3.0, 7.0, 50_000), KT)

CASES = {
    "fill_knots (50k queries, 200 knots)": lambda g: kernels.fill_knots(KT, KV, Q, g),
    "fresh_eval (2^14 points)": lambda g: kernels.fresh_eval(GRID, g),
    "chain_rows (20k x 3)": lambda g: kernels.chain_rows(X3, g),
    "iterated_point (n=10, 20k)": lambda g: kernels.iterated_point(10, 1.0, 20_000, g),
    "grid_oscillation (n=8, 2^14, 20)": lambda g: kernels.grid_oscillation(8, GRID, 20, g),
    "range_product (30 terms, 2^14, 10)": lambda g: kernels.range_product(30, 2 ** 14, 10, g),
    "two_sided_max_abs (2^15 half, 20)": lambda g: kernels.two_sided_max_abs(2 ** 15, 20, g),
}


def bench(fn, repeat):
    t0 = time.perf_counter()
    fn(RngStream(0).generator)
    first = time.perf_counter() - t0
    times = []
    for r in range(repeat):
        g = RngStream(1, r).generator
        t0 = time.perf_counter()
        fn(g)
        times.append(time.perf_counter() - t0)
    return first, statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if _backend.HAVE_NUMBA else ["numpy"]
    rows = []
    print(f"{'kernel':38s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}   (median s; first numba call)")
    for name, fn in CASES.items():
        res = {}
        for b in backends:
            _backend.set_backend(b)
            res[b] = bench(fn, args.repeat)
        nb = res.get("numba", (float("nan"),) * 2)
        npy = res["numpy"]
        print(f"{name:38s} {nb[1]:10.4f} {npy[1]:10.4f} {npy[1] / nb[1]:7.1f}x   ({nb[0]:.2f})")
        rows.append({"kernel": name, "numba_s": nb[1], "numpy_s": npy[1], "numba_first_s": nb[0]})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
