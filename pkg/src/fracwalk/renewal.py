"""Renewal sequence, its autocorrelations and the variance of the walk.

``q[n]`` is the probability that the partial sums of iid draws from the law
hit ``n`` (``q[0] = 1``).  It solves the renewal equation
``q[n] = sum_{k=1}^n pmf(k) q[n-k]``, i.e. ``Q = 1 / (1 - P)`` as power
series.  The autocorrelations ``c[i] = sum_j q[j] q[j+i]`` are the
Fourier coefficients of ``|Q|^2``; ``c[i] / c[0]`` is the probability that
the ancestral lines of two sites at distance ``i`` meet.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft, signal
from scipy.special import gamma, hyp2f1

from . import _kernels
from .laws import FiniteLaw, TailLaw
from .seeding import CHUNK, HITTING, resolve_seed, run_replicas

__all__ = [
    "RenewalSeq",
    "CorrelationSeq",
    "DivergentRegimeError",
    "pmf_vector",
    "renewal_sequence",
    "renewal_sequence_naive",
    "hitting_frequencies",
    "q_partial_sum_check",
    "q_square_sum",
    "fit_power_tail",
    "correlation_sequence",
    "k_alpha",
    "variance_constant",
    "c_tilde",
    "exact_variance",
    "asymptotic_variance",
]


class DivergentRegimeError(ValueError):
    """Raised when sum q_n**2 diverges, so |Q|^2 has no coefficients."""


@dataclass(frozen=True)
class RenewalSeq:
    q: np.ndarray
    law: object

    @property
    def N(self) -> int:
        return len(self.q) - 1


@dataclass(frozen=True)
class CorrelationSeq:
    """Truncated autocorrelations of the renewal sequence.

    Attributes
    ----------
    c : ndarray
        ``c[i] = sum_{j=0}^{J-i} q[j] q[j+i]``, a lower bound on the exact
        coefficient.
    trunc_error : ndarray
        Cauchy-Schwarz bound on the omitted part, from the fitted tail.
    tail_estimate : ndarray
        Power-law extrapolation of the omitted part.
    J : int
        Truncation depth.
    converged : bool
        Whether the adaptive doubling met ``rel_tol`` before ``max_J``.
    """

    c: np.ndarray
    trunc_error: np.ndarray
    tail_estimate: np.ndarray
    J: int
    converged: bool
    law: object = None
    tail_fit: tuple = (0.0, 0.0)

    @property
    def M(self) -> int:
        return len(self.c) - 1

    @property
    def values(self) -> np.ndarray:
        """Best estimate of the exact coefficients (truncated + tail)."""
        return self.c + self.tail_estimate

    @property
    def c0(self) -> float:
        return float(self.values[0])

    def rho(self, d):
        """Meeting probability c[d]/c[0]; power-law extrapolated beyond M."""
        d = np.abs(np.asarray(d, dtype=np.int64))
        v = self.values
        amp, expo = self.rho_tail()
        head = v[np.minimum(d, self.M)] / v[0]
        far = amp * np.maximum(d, 1).astype(float) ** expo
        return np.where(d <= self.M, head, np.minimum(far, 1.0))

    def rho_tail(self):
        """(amp, expo) with rho(d) ~ amp * d**expo fitted on the last decade."""
        lo = max(1, self.M // 10)
        i = np.arange(lo, self.M + 1)
        v = self.values[lo:] / self.values[0]
        if len(i) < 2 or np.any(v <= 0):
            return 0.0, 0.0
        expo, logamp = np.polyfit(np.log(i), np.log(v), 1)
        return float(math.exp(logamp)), float(expo)


def pmf_vector(law, N: int) -> np.ndarray:
    """p[0..N] with p[0] = 0."""
    p = np.zeros(N + 1)
    if isinstance(law, FiniteLaw):
        m = min(N, law.support_max)
        p[1:m + 1] = law.weights[:m]
        return p
    t = law.tail(np.arange(1, N + 2, dtype=float))
    p[1:] = t[:-1] - t[1:]
    return p


def _conv(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    m = fft.next_fast_len(len(a) + len(b) - 1, real=True)
    return fft.irfft(fft.rfft(a, m) * fft.rfft(b, m), m)[:n]


def _series_inverse(f: np.ndarray, n: int) -> np.ndarray:
    # Newton iteration g <- g (2 - f g) doubles the number of correct terms
    g = np.array([1.0 / f[0]])
    k = 1
    while k < n:
        k2 = min(2 * k, n)
        e = -_conv(f[:k2], g, k2)
        e[0] += 2.0
        g = _conv(g, e, k2)
        k = k2
    return g


def renewal_sequence(law, N: int) -> RenewalSeq:
    """q[0..N] via FFT power-series inversion of 1 - P (O(N log N)).

    Finite-support laws use the recursion directly (O(N m)).
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if isinstance(law, FiniteLaw):
        # short recursion, exact in floating point for dyadic weights
        impulse = np.zeros(N + 1)
        impulse[0] = 1.0
        a = np.concatenate([[1.0], -np.asarray(law.weights, dtype=float)])
        return RenewalSeq(np.clip(signal.lfilter([1.0], a, impulse), 0.0, 1.0), law)
    f = -pmf_vector(law, N)
    f[0] = 1.0
    q = _series_inverse(f, N + 1)
    return RenewalSeq(np.clip(q, 0.0, 1.0), law)


def renewal_sequence_naive(law, N: int) -> RenewalSeq:
    """q[0..N] by direct recursion (O(N**2)); reference for the fast path."""
    p = pmf_vector(law, N)
    q = np.zeros(N + 1)
    q[0] = 1.0
    for n in range(1, N + 1):
        q[n] = np.dot(p[1:n + 1], q[n - 1::-1])
    return RenewalSeq(q, law)


def hitting_frequencies(law, N: int, reps: int, seed=None, threads=None) -> np.ndarray:
    """Monte Carlo estimate of q[0..N] from ``reps`` sampled renewal sets.

    Independent of the recursion: each replica draws look-backs until its
    partial sums pass N and records which sites it hit.
    """
    seed = resolve_seed(seed)
    kind, a, b, ft = law.kernel_params()
    n_chunks = -(-reps // CHUNK)
    counts = np.zeros((n_chunks, N + 1), dtype=np.int64)

    def task(r0, r1):
        _kernels.hitting_counts(kind, a, b, ft, np.uint64(seed), np.uint64(HITTING),
                                np.int64(N), r0, r1, counts[r0 // CHUNK])

    run_replicas(task, reps, threads)
    freq = counts.sum(axis=0) / reps
    freq[0] = 1.0
    return freq


def q_partial_sum_check(seq: RenewalSeq, x: int):
    """Partial sum of q against its regularly varying asymptote.

    Returns ``(sum, asymptote, ratio)`` where the asymptote is
    ``(1 - a) / (Gamma(2 - a) Gamma(1 + a)) * x**a / L(x)``.
    """
    if x > seq.N:
        raise ValueError(f"x={x} exceeds sequence length N={seq.N}")
    s = float(np.sum(seq.q[:x + 1]))
    law = seq.law
    if not isinstance(law, TailLaw) or not law.alpha < 1:
        return s, math.nan, math.nan
    a = law.alpha
    asym = (1 - a) / (gamma(2 - a) * gamma(1 + a)) * x ** a / float(law.slowly_varying(x))
    return s, asym, s / asym


def fit_power_tail(q: np.ndarray, span: int = 10):
    """Least-squares fit q[j] ~ a * j**g over indices [J/span, J]."""
    J = len(q) - 1
    j = np.arange(max(1, J // span), J + 1)
    y = q[j]
    if len(j) < 2 or np.any(y <= 0):
        return 0.0, 0.0
    g, loga = np.polyfit(np.log(j), np.log(y), 1)
    return float(math.exp(loga)), float(g)


def _square_tail(a: float, g: float, start) -> np.ndarray:
    """Model estimate of sum_{j >= start} q[j]**2 (midpoint integral)."""
    s = np.asarray(start, dtype=float) - 0.5
    e = 2 * g + 1
    if e >= 0:
        return np.full(s.shape, np.inf)
    return a * a * s ** e / (-e)


def q_square_sum(seq: RenewalSeq):
    """(sum_{n<=N} q_n**2, estimated remainder beyond N).

    The remainder comes from a power-law fit to the last decade of q and is
    infinite when the fitted decay is too slow for the sum to converge.
    """
    value = float(np.dot(seq.q, seq.q))
    a, g = fit_power_tail(seq.q)
    return value, float(_square_tail(a, g, seq.N + 1))


def _autocorr(q: np.ndarray, M: int) -> np.ndarray:
    m = fft.next_fast_len(2 * len(q), real=True)
    F = fft.rfft(q, m)
    c = fft.irfft(F * np.conj(F), m)[:M + 1]
    return np.maximum(c, 0.0)


def _pair_tail(a: float, g: float, J: int, M: int):
    """Estimate and Cauchy-Schwarz bound of sum_{j > J-i} q[j] q[j+i]."""
    i = np.arange(M + 1, dtype=float)
    e = 2 * g + 1
    if e >= 0:
        inf = np.full(M + 1, np.inf)
        return inf, inf
    s = J - i + 0.5
    # int_s^inf x**g (x+i)**g dx = s**e / (-e) * 2F1(-g, -e; 1-e; -i/s)
    est = a * a * s ** e / (-e) * hyp2f1(-g, -e, 1 - e, -i / s)
    bound = np.sqrt(_square_tail(a, g, J - i + 1) * _square_tail(a, g, J + 1))
    return np.minimum(est, bound), bound


def _require_convergent(law):
    if isinstance(law, TailLaw) and law.alpha >= 0.5:
        raise DivergentRegimeError(
            f"sum of q_n^2 diverges for alpha={law.alpha} >= 1/2")


def correlation_sequence(seq: RenewalSeq, M: int, rel_tol: float = 1e-5,
                         max_J: int = 2 ** 21) -> CorrelationSeq:
    """Autocorrelation coefficients c[0..M] of the renewal sequence.

    The truncation depth J starts at ``max(seq.N, 8 M)`` and is doubled
    (recomputing q for the same law) until the tail-corrected coefficients
    change by less than ``rel_tol`` relatively, or ``max_J`` is reached.
    Finite-support laws are not adaptive: their sums diverge, and the
    result is the plain truncation at ``J = seq.N`` with infinite error.
    """
    law = seq.law
    _require_convergent(law)
    if isinstance(law, FiniteLaw) or law is None:
        if M > seq.N:
            raise ValueError("M exceeds the sequence length")
        c = _autocorr(seq.q, M)
        inf = np.full(M + 1, np.inf)
        return CorrelationSeq(c, inf, np.zeros(M + 1), seq.N, False, law)

    J = max(seq.N, 8 * M)
    q = seq.q if seq.N == J else renewal_sequence(law, J).q
    prev = None
    while True:
        a, g = fit_power_tail(q, span=2)
        c = _autocorr(q, M)
        est, bound = _pair_tail(a, g, J, M)
        cur = c + est
        if prev is not None:
            change = np.max(np.abs(cur - prev) / cur)
            if change < rel_tol:
                return CorrelationSeq(c, bound, est, J, True, law, (a, g))
        if 2 * J > max_J:
            warnings.warn(
                f"correlation sequence not converged to rel_tol={rel_tol} at J={J}",
                RuntimeWarning, stacklevel=2)
            return CorrelationSeq(c, bound, est, J, False, law, (a, g))
        prev = cur
        J *= 2
        q = renewal_sequence(law, J).q


def k_alpha(alpha: float) -> float:
    """Closed form [2a(2a+1)]^-1 [Gamma(1-2a)^2 Gamma(2a) cos(pi a)]^-1.

    This is the constant as usually quoted for the growth of
    ``sum_{i<=n} (n - i) c[i]``.  It does not reproduce the actual
    asymptotics of the variance; see :func:`variance_constant`.
    """
    if not 0 < alpha < 0.5:
        raise ValueError(f"K_alpha needs 0 < alpha < 1/2, got {alpha}")
    a = alpha
    return 1.0 / (2 * a * (2 * a + 1)) / (gamma(1 - 2 * a) ** 2 * gamma(2 * a) * math.cos(math.pi * a))


def variance_constant(alpha: float) -> float:
    """V with Var S_n ~ 4p(1-p) V / c[0] * n**(2a+1) / L(n)**2.

    Since ``c[i] ~ Gamma(1-2a) sin(pi a) / (pi Gamma(1-a)**2) * i**(2a-1) / L(i)**2``
    the double sum in the exact variance gives
    ``V = 2 Gamma(1-2a) sin(pi a) / (pi Gamma(1-a)**2 * 2a(2a+1))``,
    which equals ``k_alpha(a) * Gamma(1-2a)**2 / Gamma(1-a)**2``.
    """
    if not 0 < alpha < 0.5:
        raise ValueError(f"variance constant needs 0 < alpha < 1/2, got {alpha}")
    a = alpha
    return (2 * gamma(1 - 2 * a) * math.sin(math.pi * a)
            / (math.pi * gamma(1 - a) ** 2 * 2 * a * (2 * a + 1)))


def _check_p(p: float):
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def c_tilde(law: TailLaw, p: float, corr: CorrelationSeq) -> float:
    """Normalising constant making the rescaled walk's variance tend to 1.

    ``c_tilde**2 = c[0] / (4 p (1-p) V)`` with V from
    :func:`variance_constant`.
    """
    _check_p(p)
    _require_convergent(law)
    if not isinstance(law, TailLaw):
        raise ValueError("c_tilde needs a regularly varying law")
    return math.sqrt(corr.c0 / (4 * p * (1 - p) * variance_constant(law.alpha)))


def exact_variance(p: float, corr: CorrelationSeq, n):
    """Var S_n = 4p(1-p)/c0 * (n c0 + 2 sum_{i=1}^n (n-i) c[i]).

    ``n`` may be an integer or an array of integers, all at most ``corr.M``.
    """
    _check_p(p)
    n_arr = np.asarray(n, dtype=np.int64)
    if np.any(n_arr < 1) or np.any(n_arr > corr.M):
        raise ValueError(f"n must lie in [1, {corr.M}]")
    v = corr.values
    idx = np.arange(len(v), dtype=float)
    s1 = np.cumsum(v) - v[0]           # sum_{i=1}^{n} c_i
    si = np.cumsum(idx * v)            # sum_{i=1}^{n} i c_i
    nf = n_arr.astype(float)
    inner = nf * v[0] + 2.0 * (nf * s1[n_arr] - si[n_arr])
    out = 4 * p * (1 - p) / v[0] * inner
    return float(out) if np.ndim(n) == 0 else out


def asymptotic_variance(law: TailLaw, p: float, corr: CorrelationSeq, n):
    """Leading-order growth 4p(1-p) V / c0 * n**(2a+1) / L(n)**2."""
    _check_p(p)
    a = law.alpha
    nf = np.asarray(n, dtype=float)
    out = (4 * p * (1 - p) * variance_constant(a) / corr.c0
           * nf ** (2 * a + 1) / law.slowly_varying(nf) ** 2)
    return float(out) if np.ndim(n) == 0 else out
