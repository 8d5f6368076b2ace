"""Fractional Gaussian noise and Hurst recovery.

Draws exact fGn with H = alpha + 1/2 and recovers H from the exact
variance curve of the walk.
"""
import numpy as np

from fracwalk.diagnostics import correlations_for
from fracwalk.fbm import FbmParams, fgn_autocovariance, hurst_estimate, sample_fgn
from fracwalk.laws import make_tail_law
from fracwalk.renewal import exact_variance

params = FbmParams.from_alpha(0.25)
x = sample_fgn(params, 16, seed=7, size=50_000)
print("empirical lag-1 covariance", np.mean(x[:, :-1] * x[:, 1:]).round(4),
      "target", round(float(fgn_autocovariance(params, 1)), 4))

law = make_tail_law(0.25)
ns = 2 ** np.arange(8, 15)
curve = exact_variance(0.5, correlations_for(law, 2 ** 14), ns)
H, se = hurst_estimate(list(zip(ns, curve)))
print(f"H from exact variance curve: {H:.4f} (se {se:.4f}), target 0.75")
