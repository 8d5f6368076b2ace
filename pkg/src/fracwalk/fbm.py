"""Fractional Brownian motion reference: covariances, exact fGn, Hurst fits."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .seeding import FGN, resolve_seed

__all__ = [
    "FbmParams",
    "fbm_covariance",
    "fgn_autocovariance",
    "fgn_covariance_matrix",
    "sample_fgn",
    "hurst_estimate",
    "MAX_FGN_LENGTH",
]

MAX_FGN_LENGTH = 4096


@dataclass(frozen=True)
class FbmParams:
    H: float

    def __post_init__(self):
        if not 0 < self.H < 1:
            raise ValueError(f"Hurst parameter must lie in (0, 1), got {self.H}")

    @classmethod
    def from_alpha(cls, alpha: float) -> "FbmParams":
        return cls(alpha + 0.5)


def fbm_covariance(params: FbmParams, s, t):
    """E[B_s B_t] = (t^2H + s^2H - |t - s|^2H) / 2."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("times must be non-negative")
    h2 = 2 * params.H
    return 0.5 * (t ** h2 + s ** h2 - np.abs(t - s) ** h2)


def fgn_autocovariance(params: FbmParams, k):
    """gamma(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H) / 2 for unit-step increments."""
    k = np.abs(np.asarray(k, dtype=float))
    h2 = 2 * params.H
    return 0.5 * (np.abs(k + 1) ** h2 - 2 * k ** h2 + np.abs(k - 1) ** h2)


def fgn_covariance_matrix(params: FbmParams, n: int) -> np.ndarray:
    return linalg.toeplitz(fgn_autocovariance(params, np.arange(n)))


@functools.lru_cache(maxsize=8)
def _cholesky(H: float, n: int) -> np.ndarray:
    return linalg.cholesky(fgn_covariance_matrix(FbmParams(H), n), lower=True)


def sample_fgn(params: FbmParams, n: int, seed=None, size: int = None) -> np.ndarray:
    """Exact fractional Gaussian noise by Cholesky factorisation.

    Returns shape ``(n,)``, or ``(size, n)`` when ``size`` is given.
    """
    if not 1 <= n <= MAX_FGN_LENGTH:
        raise ValueError(f"n must lie in [1, {MAX_FGN_LENGTH}]")
    seed = resolve_seed(seed)
    try:
        chol = _cholesky(params.H, n)
    except linalg.LinAlgError as exc:
        raise linalg.LinAlgError(
            f"fGn covariance not numerically positive definite (H={params.H}, n={n})") from exc
    rng = np.random.default_rng([seed % 2 ** 63, FGN])
    z = rng.standard_normal((1 if size is None else size, n))
    out = z @ chol.T
    return out[0] if size is None else out


def hurst_estimate(variance_curve):
    """Fit Var S_n ~ C n^2H on log-log axes.

    Parameters
    ----------
    variance_curve : sequence of (n, variance) pairs
        At least four points, ideally dyadic.

    Returns
    -------
    (H_hat, stderr)
        Half the regression slope and its standard error.
    """
    arr = np.asarray(variance_curve, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 4:
        raise ValueError("need at least four (n, variance) points")
    if np.any(arr[:, 1] <= 0) or np.any(arr[:, 0] <= 0):
        raise ValueError("variances and sizes must be positive")
    fit = stats.linregress(np.log(arr[:, 0]), np.log(arr[:, 1]))
    stderr = 0.5 * fit.stderr if math.isfinite(fit.stderr) else 0.0
    return 0.5 * fit.slope, stderr
