"""The random graph G_mu: parents, components and meeting of ancestral lines."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from . import _kernels
from .seeding import MEETING, PARENTS, resolve_seed, run_replicas, stream_key

__all__ = [
    "ParentMap",
    "Partition",
    "MeetingEstimate",
    "sample_parents",
    "component_partition",
    "brute_force_partition",
    "meeting_depths",
    "meeting_probability_mc",
    "meeting_scan",
    "component_counts",
]

Z99 = 2.5758293035489004


@dataclass(frozen=True)
class ParentMap:
    """Look-back offsets k_z for every vertex z of the window [lo, hi]."""

    lo: int
    hi: int
    parent_offset: np.ndarray
    seed: int
    stream: int = 0

    def parent(self, z: int) -> int:
        return z - int(self.parent_offset[z - self.lo])


@dataclass(frozen=True)
class Partition:
    """Components of the window graph.

    ``representative[z - lo]`` is the component id of z.  Component ``c`` has
    lowest vertex ``min_vertex[c]`` and its line leaves the window at
    ``exit_points[c] < lo``.
    """

    lo: int
    hi: int
    representative: np.ndarray
    min_vertex: np.ndarray
    exit_points: np.ndarray

    @property
    def n_components(self) -> int:
        return len(self.min_vertex)

    def count_touching(self, a: int, b: int) -> int:
        """Number of components meeting the vertex range [a, b]."""
        return len(np.unique(self.representative[a - self.lo:b - self.lo + 1]))


def sample_parents(law, lo: int, hi: int, seed=None, stream: int = 0) -> ParentMap:
    """Independent k_z for z in [lo, hi], keyed by (seed, stream, z).

    Overlapping windows drawn with the same seed and stream agree on their
    overlap.
    """
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    seed = resolve_seed(seed)
    kind, a, b, ft = law.kernel_params()
    key = stream_key(seed, PARENTS, stream)
    offsets = _kernels.window_offsets(kind, a, b, ft, key, np.int64(lo), np.int64(hi))
    return ParentMap(lo, hi, offsets, seed, stream)


def component_partition(pm: ParentMap) -> Partition:
    """Merge every z with its parent when the parent lies in the window.

    Parents always lie below their children, so one increasing sweep that
    copies the root of the parent is a complete union-find here.
    """
    root = _kernels.window_roots(pm.lo, pm.parent_offset)
    roots, rep = np.unique(root, return_inverse=True)
    lo = pm.lo
    offs = pm.parent_offset[roots]
    exits = np.array([_kernels.parent_of(lo + int(r), int(k)) for r, k in zip(roots, offs)],
                     dtype=np.int64)
    return Partition(lo, pm.hi, rep.astype(np.int64), roots + lo, exits)


def brute_force_partition(lo: int, offsets) -> np.ndarray:
    """Component labels by explicit ancestral-line intersection (tiny windows).

    Two vertices are joined when their ancestral lines, truncated at ``lo``,
    share a vertex.  Returns canonical labels (first occurrence order).
    """
    offsets = list(offsets)
    m = len(offsets)
    lines = []
    for i in range(m):
        line, z = set(), lo + i
        while z >= lo:
            line.add(z)
            z -= offsets[z - lo]
        lines.append(line)
    label = [-1] * m
    nxt = 0
    for i in range(m):
        if label[i] >= 0:
            continue
        label[i] = nxt
        stack = [i]
        while stack:
            a = stack.pop()
            for b in range(m):
                if label[b] < 0 and lines[a] & lines[b]:
                    label[b] = nxt
                    stack.append(b)
        nxt += 1
    return np.array(label)


@numba.njit(cache=True, nogil=True)
def _meeting_batch(kind, alpha, beta, ftail, seed, purpose, k, max_depth, r0, r1, out):
    for r in range(r0, r1):
        key = _kernels.derive_key(seed, purpose, np.uint64(r))
        out[r] = _kernels.meeting_depth(kind, alpha, beta, ftail, key, k, max_depth)


def meeting_depths(law, k: int, max_depth: int, reps: int, seed=None, threads=None) -> np.ndarray:
    """Per replica, the depth at which the lines of 0 and k first meet (-1: never).

    Both lines are traced in one realised graph, so a meeting means they
    coalesce.  Replica r uses the stream (seed, r).
    """
    if k < 1:
        raise ValueError("k must be positive")
    seed = resolve_seed(seed)
    kind, a, b, ft = law.kernel_params()
    out = np.empty(reps, dtype=np.int64)

    def task(r0, r1):
        _meeting_batch(kind, a, b, ft, np.uint64(seed), np.uint64(MEETING), np.int64(k),
                       np.int64(max_depth), r0, r1, out)

    run_replicas(task, reps, threads)
    return out


@dataclass(frozen=True)
class MeetingEstimate:
    k: int
    depth: int
    estimate: float
    ci: float
    reps: int


def _estimate(depths: np.ndarray, k: int, depth: int) -> MeetingEstimate:
    reps = len(depths)
    hit = float(np.count_nonzero((depths >= 0) & (depths <= depth))) / reps
    ci = Z99 * math.sqrt(max(hit * (1 - hit), 0.0) / reps)
    return MeetingEstimate(k, depth, hit, ci, reps)


def meeting_probability_mc(law, k: int, depth: int, reps: int, seed=None, threads=None) -> MeetingEstimate:
    """Fraction of replicas in which the lines of 0 and k meet above -depth.

    A lower bound on the meeting probability c[k]/c[0]; undecided pairs
    count as not meeting.  ``ci`` is the 99% binomial half-width.
    """
    depths = meeting_depths(law, k, depth, reps, seed, threads)
    return _estimate(depths, k, depth)


def meeting_scan(law, k: int, depths, reps: int, seed=None, threads=None):
    """Estimates at several depths from one coupled set of replicas.

    The same realised graphs are used for every depth, so the estimates are
    non-decreasing in depth.
    """
    depths = sorted(int(d) for d in depths)
    rec = meeting_depths(law, k, depths[-1], reps, seed, threads)
    return [_estimate(rec, k, d) for d in depths]


def component_counts(law, n: int, depth: int, reps: int, seed=None, threads=None):
    """Per replica, (components meeting {1..n}, those whose lines pass below -depth).

    Replica r uses the parent stream of :func:`sample_parents` with
    ``stream=r``, traced lazily below 0.
    """
    if n < 1 or depth < 0:
        raise ValueError("need n >= 1 and depth >= 0")
    seed = resolve_seed(seed)
    kind, a, b, ft = law.kernel_params()
    out = np.empty((reps, 2), dtype=np.int64)

    def task(r0, r1):
        for r in range(r0, r1):
            _, _, exits, _ = _kernels.trace_components(
                kind, a, b, ft, stream_key(seed, PARENTS, r), np.int64(n), np.int64(depth))
            out[r, 0] = len(exits)
            out[r, 1] = np.count_nonzero(exits < -depth)

    run_replicas(task, reps, threads)
    return out
