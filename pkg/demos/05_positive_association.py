"""Positive association and the running maximum.

Increasing functionals of the walk should never be negatively correlated.
The running maximum has a tail that vanishes at a few rescaled units.
"""
from fracwalk.diagnostics import correlations_for, fkg_test, max_statistics
from fracwalk.laws import make_tail_law
from fracwalk.renewal import c_tilde

law = make_tail_law(0.25)
rep = fkg_test(law, 0.5, 128, 4000, seed=8)
worst = min(rep.rows, key=lambda r: r["mc_estimate"] / r["stderr"])
print("FKG passed:", rep.passed, " smallest z:", round(worst["mc_estimate"] / worst["stderr"], 1))

ct = c_tilde(law, 0.5, correlations_for(law, 1024))
ms = max_statistics(law, 0.5, 1024, 2000, [0.0, 1 / ct, 4 / ct], seed=9)
print("P(A_0n > theta n^H):", ms.tail_freq.round(4), " monotone:", ms.monotone)
