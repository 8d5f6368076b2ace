"""Walks driven by the look-back graph.

``sample_gibbs_increments`` approximates the extremal Gibbs measure lambda_p:
ancestral lines of 1..n are followed down to ``-B``; components still
separate there receive independent p-coins.  ``sample_adjusted_walk`` is the
half-line variant with fresh fair coins whenever a look-back leaves the
domain.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .laws import TailLaw
from .renewal import correlation_sequence, renewal_sequence
from .seeding import COINS, COLORS, PARENTS, resolve_seed, run_replicas, stream_key

__all__ = [
    "SamplerDiagnostics",
    "WalkPath",
    "RescaledPath",
    "Ensemble",
    "sample_gibbs_increments",
    "gibbs_ensemble",
    "sample_adjusted_walk",
    "rescale",
    "rescale_factor",
    "interpolate_positions",
]

# correlation table used for coalescence-risk estimates
RISK_TABLE_M = 4096


@dataclass
class SamplerDiagnostics:
    burn_in: int
    components_touching: int
    exiting_components: int
    coalescence_risk: float = math.nan
    variance_deficit: float = math.nan
    fresh_coins: int = 0

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v)
                for k, v in self.__dict__.items()}


@dataclass
class WalkPath:
    increments: np.ndarray
    positions: np.ndarray
    p: float
    law: object
    diagnostics: SamplerDiagnostics = None

    @property
    def n(self) -> int:
        return len(self.increments)


@dataclass
class RescaledPath:
    t: np.ndarray
    values: np.ndarray


def _check_p(p):
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def _resolve_depth(n, B):
    if B is None:
        return 8 * n
    if B < n:
        raise ValueError(f"burn-in depth B={B} must be at least n={n}")
    return int(B)


@functools.lru_cache(maxsize=16)
def _risk_table(law):
    if not isinstance(law, TailLaw) or law.alpha >= 0.5:
        return None
    corr = correlation_sequence(renewal_sequence(law, RISK_TABLE_M), RISK_TABLE_M)
    amp, expo = corr.rho_tail()
    return corr.values / corr.values[0], amp, expo


def _risk(law, exit_pos, csize):
    table = _risk_table(law)
    if table is None:
        return math.nan, math.nan
    head, amp, expo = table
    return _kernels.pair_risk(exit_pos, csize, head, amp, expo)


def _one_replica(law, p, n, depth, seed, replica):
    kind, a, b, ft = law.kernel_params()
    pkey = stream_key(seed, PARENTS, replica)
    ckey = stream_key(seed, COLORS, replica)
    comp, min_v, exits, csize = _kernels.trace_components(
        kind, a, b, ft, pkey, np.int64(n), np.int64(depth))
    x = _kernels.color_increments(comp, min_v, ckey, float(p))
    return x, min_v, exits, csize


def _warn_regime(law):
    if isinstance(law, TailLaw) and law.alpha > 0.5:
        warnings.warn(
            f"alpha={law.alpha} > 1/2: the graph has one component almost surely and "
            "lambda_p is a mixture of the two constant configurations; the finite-depth "
            "sampler shows only a transient", RuntimeWarning, stacklevel=3)


def sample_gibbs_increments(law, p: float, n: int, B: int = None, seed=None,
                            replica: int = 0) -> WalkPath:
    """One path X_1..X_n under the depth-B approximation of lambda_p.

    Parameters
    ----------
    law : TailLaw or FiniteLaw
    p : float
        Probability that a component is coloured +1.
    n : int
        Path length.
    B : int, optional
        Depth below 0 to which ancestral lines are followed (default 8 n).
    seed : int, optional
        Master seed; drawn from entropy and printed when omitted.
    replica : int
        Replica index; (seed, replica) determines the path.
    """
    _check_p(p)
    _warn_regime(law)
    depth = _resolve_depth(n, B)
    seed = resolve_seed(seed)
    x, min_v, exits, csize = _one_replica(law, p, n, depth, seed, replica)
    risk, cross = _risk(law, exits, csize)
    diag = SamplerDiagnostics(depth, len(min_v), int(np.count_nonzero(exits < -depth)),
                              risk, 4 * p * (1 - p) * cross)
    pos = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(x, out=pos[1:])
    return WalkPath(x, pos, p, law, diag)


@dataclass
class Ensemble:
    """Per-replica statistics from :func:`gibbs_ensemble`."""

    stats: np.ndarray
    components: np.ndarray
    risk: np.ndarray
    deficit: np.ndarray
    burn_in: int
    seed: int
    extra: dict = field(default_factory=dict)

    @property
    def coalescence_risk(self) -> float:
        r = self.risk[~np.isnan(self.risk)]
        return float(r.mean()) if r.size else math.nan

    @property
    def variance_deficit(self) -> float:
        d = self.deficit[~np.isnan(self.deficit)]
        return float(d.mean()) if d.size else math.nan

    def diagnostics(self) -> dict:
        return {
            "burn_in": self.burn_in,
            "components_touching_mean": float(self.components.mean()),
            "exiting_components_mean": float(self.components.mean()),
            "coalescence_risk": _none_if_nan(self.coalescence_risk),
            "variance_deficit": _none_if_nan(self.variance_deficit),
            "risk_replicas": int(np.count_nonzero(~np.isnan(self.risk))),
        }


def _none_if_nan(v):
    return None if isinstance(v, float) and math.isnan(v) else v


def gibbs_ensemble(law, p: float, n: int, reps: int, statistic, n_stats: int,
                   B: int = None, seed=None, threads=None, risk_reps: int = 200) -> Ensemble:
    """Run ``reps`` independent replicas and reduce each path with ``statistic``.

    ``statistic(x)`` receives the int8 increments X_1..X_n and returns
    ``n_stats`` floats.  The coalescence diagnostics are evaluated on the
    first ``risk_reps`` replicas.
    """
    _check_p(p)
    _warn_regime(law)
    depth = _resolve_depth(n, B)
    seed = resolve_seed(seed)
    stats = np.empty((reps, n_stats))
    comps = np.empty(reps, dtype=np.int64)
    risk = np.full(reps, math.nan)
    deficit = np.full(reps, math.nan)
    _risk_table(law)  # build once outside the workers

    def task(r0, r1):
        for r in range(r0, r1):
            x, min_v, exits, csize = _one_replica(law, p, n, depth, seed, r)
            stats[r] = statistic(x)
            comps[r] = len(min_v)
            if r < risk_reps:
                pr, cross = _risk(law, exits, csize)
                risk[r] = pr
                deficit[r] = 4 * p * (1 - p) * cross

    run_replicas(task, reps, threads)
    return Ensemble(stats, comps, risk, deficit, depth, seed)


def sample_adjusted_walk(law, n: int, seed=None, replica: int = 0) -> WalkPath:
    """Half-line walk: X_i = X_{i-k_i} if i - k_i >= 1, else a fresh fair coin."""
    if n < 1:
        raise ValueError("n must be positive")
    seed = resolve_seed(seed)
    kind, a, b, ft = law.kernel_params()
    x, fresh = _kernels.adjusted_walk(kind, a, b, ft, stream_key(seed, PARENTS, replica),
                                      stream_key(seed, COINS, replica), np.int64(n))
    pos = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(x, out=pos[1:])
    diag = SamplerDiagnostics(0, 0, 0, fresh_coins=int(fresh))
    return WalkPath(x, pos, 0.5, law, diag)


def interpolate_positions(positions: np.ndarray, s) -> np.ndarray:
    """S(s) for real s >= 0, linear between integers."""
    return np.interp(np.asarray(s, dtype=float), np.arange(len(positions)), positions)


def rescale_factor(law, c_tilde: float, n: int) -> float:
    """c_tilde * n**(-1/2 - alpha) * L(n)."""
    return c_tilde * n ** (-0.5 - law.alpha) * float(law.slowly_varying(n))


def rescale(path: WalkPath, law, c_tilde: float, n: int, grid) -> RescaledPath:
    """t -> c_tilde n^(-1/2-alpha) L(n) (S(nt) - n(2p-1)t) on ``grid``."""
    t = np.asarray(grid, dtype=float)
    if np.any(t < 0) or np.any(n * t > path.n + 1e-9):
        raise ValueError(f"grid point beyond path length {path.n} (n={n})")
    s = interpolate_positions(path.positions, n * t)
    vals = rescale_factor(law, c_tilde, n) * (s - n * (2 * path.p - 1) * t)
    return RescaledPath(t, vals)
