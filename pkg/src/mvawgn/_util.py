"""Shared plumbing: seeded parallel streams, worker pool, binomial intervals."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from math import sqrt

import numpy as np

THREADS_ENV = "MV_AWGN_THREADS"


def philox_stream(seed) -> np.random.Generator:
    """Counter-based generator for one consumer.

    Accepts an int seed or a SeedSequence; distinct seeds give independent
    streams, and a stream never depends on how many other streams exist.
    """
    return np.random.Generator(np.random.Philox(seed))


def spawn_streams(seed: int, count: int) -> list[np.random.Generator]:
    """Split one root seed into `count` independent counter-based streams."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [philox_stream(c) for c in children]


def worker_count(n_tasks: int | None = None) -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    workers = cap if cap > 0 else (os.cpu_count() or 1)
    if n_tasks is not None:
        workers = min(workers, max(1, n_tasks))
    return max(1, workers)


def parallel_map(fn, items):
    """Map preserving input order; threads capped by MV_AWGN_THREADS.

    Tasks must be independent; results are collected by index so the output
    never depends on completion order.
    """
    items = list(items)
    workers = worker_count(len(items))
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """95% Wilson score interval, well behaved near 0 and 1."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * sqrt(phat * (1.0 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)
