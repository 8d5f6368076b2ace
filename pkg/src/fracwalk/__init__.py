"""Fractional random walk on the integers.

Each step copies the step a random, heavy-tailed distance back.  The
package computes the exact renewal quantities that govern the walk's
variance, samples it under the Gibbs measures lambda_p, and checks the
rescaled walk against fractional Brownian motion.
"""
from .laws import (FiniteLaw, LawError, TailLaw, finite_law, make_tail_law, parse_law, pmf,
                   sample_k, tail)
from .renewal import (CorrelationSeq, DivergentRegimeError, RenewalSeq, asymptotic_variance,
                      c_tilde, correlation_sequence, exact_variance, hitting_frequencies, k_alpha,
                      q_partial_sum_check, q_square_sum, renewal_sequence, variance_constant)
from .ancestry import (ParentMap, Partition, component_counts, component_partition,
                       meeting_probability_mc, meeting_scan, sample_parents)
from .walk import (RescaledPath, SamplerDiagnostics, WalkPath, gibbs_ensemble, rescale,
                   sample_adjusted_walk, sample_gibbs_increments)
from .fbm import FbmParams, fbm_covariance, fgn_autocovariance, hurst_estimate, sample_fgn
from .diagnostics import (ComparisonReport, MaxStats, covariance_compare, fkg_test,
                          gaussianity_check, max_statistics, variance_compare)

__version__ = "0.1.0"
