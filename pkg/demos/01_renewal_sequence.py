"""Renewal sequence of a heavy-tailed look-back law.

Builds the law P(K > n) ~ n^(-alpha), computes q_n = P(n is hit) by series
inversion, checks it against Monte Carlo hitting frequencies and prints the
autocorrelation constants that set the variance of the walk.
"""
import numpy as np

from fracwalk.laws import make_tail_law
from fracwalk.renewal import (c_tilde, correlation_sequence, hitting_frequencies, k_alpha,
                              q_partial_sum_check, renewal_sequence, variance_constant)

alpha = 0.25
law = make_tail_law(alpha)
seq = renewal_sequence(law, 2 ** 16)
print("q_1..q_5:", np.round(seq.q[1:6], 6))

freq = hitting_frequencies(law, 20, 200_000, seed=1)
print("max |q - MC| over n <= 20:", np.abs(freq - seq.q[:21]).max())

for x in (10 ** 3, 10 ** 4):
    _, _, ratio = q_partial_sum_check(seq, x)
    print(f"partial sum ratio at x={x}: {ratio:.5f}")

corr = correlation_sequence(seq, 4096)
print(f"c_0 = {corr.values[0]:.6f}, rho_1 = {corr.values[1] / corr.values[0]:.6f}")
print(f"K_alpha = {k_alpha(alpha):.6f}, V = {variance_constant(alpha):.6f}")
print(f"c_tilde(p=0.5) = {c_tilde(law, 0.5, corr):.4f}")
