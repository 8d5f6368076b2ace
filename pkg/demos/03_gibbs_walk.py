"""The walk itself: exact Gibbs sampling and the fBm rescaling.

Samples one path, prints its diagnostics, then compares the rescaled
endpoint with the fractional Brownian motion target on a small ensemble.
"""
import numpy as np

from fracwalk.diagnostics import correlations_for, covariance_compare
from fracwalk.laws import make_tail_law
from fracwalk.renewal import c_tilde
from fracwalk.walk import rescale, sample_adjusted_walk, sample_gibbs_increments

law = make_tail_law(0.25)
n = 4096
path = sample_gibbs_increments(law, 0.5, n, seed=4)
print("S_n =", path.positions[-1])
print(path.diagnostics)

ct = c_tilde(law, 0.5, correlations_for(law, n))
r = rescale(path, law, ct, n, np.linspace(0, 1, 5))
print("rescaled path on a coarse grid:", np.round(r.values, 3))

rep = covariance_compare(law, 0.5, 1024, [(0.5, 1.0), (1.0, 1.0)], 2000, seed=5, B=1024 * 1024)
for row in rep.rows:
    print(row["key"], f"MC {row['mc_estimate']:.3f}  fBm {row['exact']:.3f}")

adj = sample_adjusted_walk(law, n, seed=6)
print("adjusted walk: fresh coins used", adj.diagnostics.fresh_coins)
