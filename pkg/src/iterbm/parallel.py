"""Replica-parallel execution with worker-count independent results.

Replicas are cut into fixed-size blocks; block ``b`` always draws from
substream ``b`` of a fork of the caller's stream, so the output depends on
``(stream, replicas, block_size)`` only, never on how many workers ran it.
"""
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def default_workers():
    return os.cpu_count() or 1


def block_counts(replicas, block_size):
    nblocks = math.ceil(replicas / block_size)
    return [min(block_size, replicas - b * block_size) for b in range(nblocks)]


def replicate(func, replicas, rng, block_size, workers=1, args=()):
    """Run ``func(count, stream, *args)`` over replica blocks and concatenate.

    ``func`` must be a module-level function when ``workers > 1``.
    """
    if replicas < 1:
        raise ValueError("replicas must be positive")
    base = rng.fork()
    counts = block_counts(replicas, block_size)
    streams = [base.substream(b) for b in range(len(counts))]
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(counts) == 1:
        parts = [func(c, s, *args) for c, s in zip(counts, streams)]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(counts))) as ex:
            futs = [ex.submit(func, c, s, *args) for c, s in zip(counts, streams)]
            parts = [f.result() for f in futs]
    return np.concatenate(parts, axis=0)
