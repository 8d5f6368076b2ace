"""Monte Carlo checks of the walk against its exact and limiting laws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .fbm import FbmParams, fbm_covariance
from .laws import FiniteLaw, TailLaw
from .renewal import (asymptotic_variance, c_tilde, correlation_sequence,
                      exact_variance, renewal_sequence)
from .seeding import COINS, resolve_seed, run_replicas, stream_key
from .walk import gibbs_ensemble, rescale_factor

__all__ = [
    "ComparisonReport",
    "GaussianityResult",
    "MaxStats",
    "FUNCTIONALS",
    "correlations_for",
    "variance_compare",
    "rescaled_samples",
    "covariance_compare",
    "iid_covariance_control",
    "gaussianity_check",
    "fkg_test",
    "max_statistics",
]

# depth factor for the rescaled-walk checks; at 8n the truncation deficit
# of Var S_n is about 5% for alpha = 1/4, at 1024n about 0.4%
RESCALE_DEPTH = 1024


@dataclass
class ComparisonReport:
    """Rows of (MC estimate, stderr, target) with a pass flag each."""

    quantity: str
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def add(self, key, mc, stderr, exact, asymptote=math.nan, budget=0.0,
            sigma=3.0, one_sided=False):
        z = (mc - exact) / stderr if stderr > 0 else (0.0 if mc == exact else math.copysign(math.inf, mc - exact))
        if one_sided:
            ok = mc >= exact - sigma * stderr - budget
        else:
            ok = abs(mc - exact) <= sigma * stderr + budget
        self.rows.append({
            "key": key, "mc_estimate": float(mc), "stderr": float(stderr),
            "exact": float(exact), "asymptote": float(asymptote),
            "budget": float(budget), "z_score": float(z), "pass": bool(ok),
        })

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return None
            if isinstance(v, tuple):
                return list(v)
            return v
        return {
            "quantity": self.quantity,
            "passed": self.passed,
            "config": self.config,
            "diagnostics": self.diagnostics,
            "rows": [{k: clean(v) for k, v in r.items()} for r in self.rows],
        }


def _var_stderr(x: np.ndarray):
    v = float(np.var(x, ddof=1))
    d = x - x.mean()
    m4 = float(np.mean(d ** 4))
    return v, math.sqrt(max(m4 - v * v, 0.0) / len(x))


def _cov_stderr(x: np.ndarray, y: np.ndarray):
    dx = x - x.mean()
    dy = y - y.mean()
    prod = dx * dy
    n = len(x)
    return float(prod.sum() / (n - 1)), float(prod.std(ddof=1) / math.sqrt(n))


_corr_cache = {}


def correlations_for(law, M: int):
    """Cached correlation sequence with at least M + 1 coefficients."""
    M = max(int(M), 64)
    M = 1 << (M - 1).bit_length()
    key = (law, M)
    if key not in _corr_cache:
        _corr_cache[key] = correlation_sequence(renewal_sequence(law, M), M)
    return _corr_cache[key]


def _is_delta1(law):
    return isinstance(law, FiniteLaw) and law.support_max == 1


def variance_compare(law, p: float, n_list, reps: int, seed=None, B_factor: int = 8,
                     threads=None) -> ComparisonReport:
    """MC variance of S_n under the depth-(B_factor n) sampler vs the exact formula.

    Each n gets its own ensemble.  The allowed deviation is three standard
    errors plus the estimated truncation deficit of the sampler.  For the
    point mass at 1 the target is 4p(1-p) n^2 (a single component).
    """
    seed = resolve_seed(seed)
    n_list = sorted(int(n) for n in n_list)
    rep = ComparisonReport("variance", config={
        "law": law.to_dict(), "p": p, "n_list": n_list, "reps": reps, "seed": seed,
        "B_factor": B_factor})
    corr = None
    if isinstance(law, TailLaw):
        if law.alpha >= 0.5:
            raise ValueError("variance comparison needs alpha < 1/2")
        corr = correlations_for(law, n_list[-1])
    elif not _is_delta1(law):
        raise ValueError("variance comparison needs alpha < 1/2 or the point mass at 1")
    risks = {}
    for i, n in enumerate(n_list):
        ens = gibbs_ensemble(law, p, n, reps, lambda x: (float(x.sum(dtype=np.int64)),), 1,
                             B=B_factor * n, seed=seed + i, threads=threads, risk_reps=reps)
        v, se = _var_stderr(ens.stats[:, 0])
        if corr is not None:
            exact = exact_variance(p, corr, n)
            asym = asymptotic_variance(law, p, corr, n)
            budget = ens.variance_deficit if math.isfinite(ens.variance_deficit) else 0.0
        else:
            exact = 4 * p * (1 - p) * n * n
            asym = exact
            budget = 0.0
        rep.add(n, v, se, exact, asym, budget)
        risks[str(n)] = ens.diagnostics()
    rep.diagnostics = {"sampler": risks}
    return rep


def rescaled_samples(law, p: float, n: int, t_grid, reps: int, seed=None, B=None,
                     threads=None, corr=None):
    """Rescaled walk values at the grid times, one row per replica.

    Returns ``(values, ensemble, c_tilde)``; ``n t`` must be an integer for
    every grid point.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    idx = np.rint(n * t_grid).astype(np.int64)
    if np.any(np.abs(idx - n * t_grid) > 1e-9) or np.any(idx < 0) or np.any(idx > n):
        raise ValueError("grid points must satisfy n t in {0, ..., n}")
    corr = corr if corr is not None else correlations_for(law, 1024)
    ct = c_tilde(law, p, corr)
    drift = (2 * p - 1) * idx

    def stat(x):
        s = np.concatenate([[0], np.cumsum(x, dtype=np.int64)])
        return s[idx] - drift

    ens = gibbs_ensemble(law, p, n, reps, stat, len(idx),
                         B=RESCALE_DEPTH * n if B is None else B, seed=seed, threads=threads)
    return ens.stats * rescale_factor(law, ct, n), ens, ct


def covariance_compare(law, p: float, n: int, grid, reps: int, seed=None, B=None,
                       threads=None) -> ComparisonReport:
    """Empirical covariance of the rescaled walk vs fBm with H = alpha + 1/2.

    ``grid`` is a list of (s, t) pairs.  The budget of each row is the known
    finite-n offset (exact variance formula vs its limit) plus the sampler's
    estimated truncation deficit.
    """
    if not isinstance(law, TailLaw) or law.alpha >= 0.5:
        raise ValueError("covariance comparison needs a law with alpha < 1/2")
    seed = resolve_seed(seed)
    grid = [(float(s), float(t)) for s, t in grid]
    times = sorted({x for st in grid for x in st})
    corr = correlations_for(law, n)
    vals, ens, ct = rescaled_samples(law, p, n, times, reps, seed, B, threads, corr)
    col = {t: i for i, t in enumerate(times)}
    fac2 = rescale_factor(law, ct, n) ** 2
    H = FbmParams.from_alpha(law.alpha)

    def finite_cov(s, t):
        a, b = int(round(n * s)), int(round(n * t))
        v = lambda m: exact_variance(p, corr, m) if m > 0 else 0.0
        return 0.5 * (v(a) + v(b) - v(abs(b - a))) * fac2

    deficit = ens.variance_deficit * fac2 if math.isfinite(ens.variance_deficit) else 0.0
    rep = ComparisonReport("covariance", config={
        "law": law.to_dict(), "p": p, "n": n, "grid": grid, "reps": reps, "seed": seed,
        "B": ens.burn_in, "c_tilde": ct, "H": H.H})
    for s, t in grid:
        mc, se = _cov_stderr(vals[:, col[s]], vals[:, col[t]])
        target = float(fbm_covariance(H, s, t))
        fin = finite_cov(s, t)
        rep.add((s, t), mc, se, target, fin, abs(fin - target) + deficit)
    rep.diagnostics = {"sampler": ens.diagnostics(), "deficit_rescaled": deficit}
    return rep


def iid_covariance_control(p: float, n: int, s: float, t: float, reps: int, seed=None):
    """Independence control: iid +-1 steps, increments over (0,s] and (s,t].

    Returns a report whose single row compares their covariance with 0.
    """
    seed = resolve_seed(seed)
    a, b = int(round(n * s)), int(round(n * t))
    rng = np.random.default_rng([seed % 2 ** 63, COINS])
    first = 2.0 * rng.binomial(a, p, size=reps) - a
    second = 2.0 * rng.binomial(b - a, p, size=reps) - (b - a)
    scale = 1.0 / math.sqrt(4 * p * (1 - p) * n)
    mc, se = _cov_stderr(first * scale, second * scale)
    rep = ComparisonReport("iid_increment_covariance", config={
        "p": p, "n": n, "s": s, "t": t, "reps": reps, "seed": seed})
    rep.add((s, t), mc, se, 0.0)
    return rep


@dataclass
class GaussianityResult:
    skewness: float
    excess_kurtosis: float
    ks_stat: float
    ks_pvalue: float
    se_skew: float
    se_kurt: float
    n: int

    @property
    def passed(self) -> bool:
        return (abs(self.skewness) <= 3 * self.se_skew
                and abs(self.excess_kurtosis) <= 3 * self.se_kurt)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def gaussianity_check(samples, variance: float = None) -> GaussianityResult:
    """Sample skewness, excess kurtosis and KS distance to N(0, variance).

    ``variance`` defaults to the sample variance.
    """
    x = np.asarray(samples, dtype=float)
    N = len(x)
    if N < 8:
        raise ValueError("need at least 8 samples")
    se_skew = math.sqrt(6.0 * N * (N - 1) / ((N - 2) * (N + 1) * (N + 3)))
    se_kurt = 2 * se_skew * math.sqrt((N * N - 1.0) / ((N - 3) * (N + 5)))
    var = float(np.var(x, ddof=1)) if variance is None else float(variance)
    ks = stats.kstest(x, "norm", args=(0.0, math.sqrt(var)))
    return GaussianityResult(float(stats.skew(x)), float(stats.kurtosis(x)),
                             float(ks.statistic), float(ks.pvalue), se_skew, se_kurt, N)


# increasing functionals of the increments; "neg_B" is -B_{0,n}
FUNCTIONALS = ("S_n", "S_half", "A_0n", "plus_count", "neg_B")


def _functional_values(x, p):
    n = len(x)
    s = np.concatenate([[0], np.cumsum(x, dtype=np.int64)])
    d = s - (2 * p - 1) * np.arange(n + 1)
    top = d.max()
    return (float(s[n]), float(s[n // 2]), float(top - d[0]),
            float(np.count_nonzero(x[::3] > 0)), -float(top - d[n]))


def fkg_test(law, p: float, n: int, reps: int, seed=None, functionals=FUNCTIONALS,
             sigma: float = 3.0, B=None, threads=None) -> ComparisonReport:
    """Covariances of pairs of increasing functionals; pass iff >= -sigma stderr.

    ``plus_count`` counts +1 steps at indices 1, 4, 7, ...; ``neg_B`` is
    minus the drop from the running maximum to the endpoint, an increasing
    functional since B_{0,n} itself is decreasing.
    """
    functionals = tuple(functionals)
    unknown = [f for f in functionals if f not in FUNCTIONALS]
    if unknown:
        raise ValueError(f"not a shipped increasing functional: {unknown} "
                         f"(B_0n is decreasing; use neg_B)")
    seed = resolve_seed(seed)
    cols = [FUNCTIONALS.index(f) for f in functionals]
    ens = gibbs_ensemble(law, p, n, reps, lambda x: _functional_values(x, p), len(FUNCTIONALS),
                         B=B, seed=seed, threads=threads)
    rep = ComparisonReport("fkg_covariance", config={
        "law": law.to_dict(), "p": p, "n": n, "reps": reps, "seed": seed,
        "functionals": list(functionals), "sigma": sigma, "B": ens.burn_in})
    for i, a in enumerate(cols):
        for b in cols[i:]:
            mc, se = _cov_stderr(ens.stats[:, a], ens.stats[:, b])
            rep.add(f"{FUNCTIONALS[a]}*{FUNCTIONALS[b]}", mc, se, 0.0, sigma=sigma, one_sided=True)
    rep.diagnostics = {"sampler": ens.diagnostics()}
    rep._stats = ens.stats
    return rep


@dataclass
class MaxStats:
    """Running-maximum statistics A_{0,n}, B_{0,n} per path."""

    A: np.ndarray
    B: np.ndarray
    drift_corrected_end: np.ndarray
    thetas: np.ndarray
    thresholds: np.ndarray
    tail_freq: np.ndarray
    identity_error: float
    config: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        order = np.argsort(self.thetas)
        return bool(np.all(np.diff(self.tail_freq[order]) <= 0))

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "thetas": self.thetas.tolist(),
            "thresholds": self.thresholds.tolist(),
            "tail_freq": self.tail_freq.tolist(),
            "monotone": self.monotone,
            "identity_error": self.identity_error,
            "A_mean": float(self.A.mean()),
            "B_mean": float(self.B.mean()),
        }


def _max_values(x, p):
    n = len(x)
    s = np.concatenate([[0], np.cumsum(x, dtype=np.int64)])
    d = s - (2 * p - 1) * np.arange(n + 1)
    top = d.max()
    return top - d[0], top - d[n], d[n]


def max_statistics(law, p: float, n: int, reps: int, theta_list, seed=None, B=None,
                   threads=None) -> MaxStats:
    """Empirical P(A_{0,n} > theta n^(1/2+alpha) / L(n)) for each theta."""
    if not isinstance(law, TailLaw) or law.alpha >= 0.5:
        raise ValueError("max statistics need a law with alpha < 1/2")
    seed = resolve_seed(seed)
    ens = gibbs_ensemble(law, p, n, reps, lambda x: _max_values(x, p), 3, B=B, seed=seed,
                         threads=threads)
    A, Bv, D = ens.stats.T
    thetas = np.asarray(theta_list, dtype=float)
    scale = n ** (0.5 + law.alpha) / float(law.slowly_varying(n))
    thr = thetas * scale
    freq = np.array([np.count_nonzero(A > h) / reps for h in thr])
    ident = float(np.max(np.abs(A - Bv - D))) if reps else 0.0
    return MaxStats(A, Bv, D, thetas, thr, freq, ident, config={
        "law": law.to_dict(), "p": p, "n": n, "reps": reps, "seed": seed, "B": ens.burn_in})
