"""Seeds, stream keys and the replica runner.

A run is identified by one master seed.  Every random quantity is keyed by
``(seed, purpose, replica)`` and, inside a replica, by absolute vertex
index, so results do not depend on how replicas are scheduled.
"""
from __future__ import annotations

import os
import secrets
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels

PARENTS = 1
COLORS = 2
COINS = 3
FGN = 4
HITTING = 5
MEETING = 6

# replicas per task; fixed so that chunking never depends on the thread count
CHUNK = 64


def resolve_seed(seed=None, announce: bool = True) -> int:
    """Return ``seed`` or draw a fresh one from OS entropy and print it."""
    if seed is not None:
        return int(seed)
    seed = secrets.randbits(63)
    if announce:
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def stream_key(seed: int, purpose: int, replica: int = 0) -> np.uint64:
    return np.uint64(_kernels.derive_key(np.uint64(seed % 2 ** 64), np.uint64(purpose), np.uint64(replica)))


def default_threads() -> int:
    env = os.environ.get("FRACWALK_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_replicas(task, reps: int, threads=None):
    """Call ``task(r0, r1)`` on fixed chunks of [0, reps).

    ``task`` writes its results into caller-owned arrays indexed by replica,
    so the outcome is identical for any number of worker threads.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    chunks = [(r0, min(reps, r0 + CHUNK)) for r0 in range(0, reps, CHUNK)]
    if threads == 1 or len(chunks) == 1:
        for r0, r1 in chunks:
            task(r0, r1)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(task, r0, r1) for r0, r1 in chunks]:
            fut.result()
