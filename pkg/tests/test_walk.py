import numpy as np
import pytest
from scipy import stats

from fracwalk.diagnostics import correlations_for
from fracwalk.laws import finite_law, make_tail_law
from fracwalk.renewal import c_tilde, exact_variance
from fracwalk.walk import (gibbs_ensemble, rescale, sample_adjusted_walk,
                           sample_gibbs_increments)

LAW = make_tail_law(0.25)


def endpoint(x):
    return (float(x.sum(dtype=np.int64)),)


def test_path_structure():
    path = sample_gibbs_increments(LAW, 0.4, 300, seed=1)
    assert path.positions[0] == 0
    assert np.array_equal(np.diff(path.positions), path.increments)
    assert set(np.unique(path.increments)) <= {-1, 1}
    d = path.diagnostics
    assert d.burn_in == 2400
    assert d.exiting_components <= d.components_touching
    assert 0 <= d.coalescence_risk <= 1
    again = sample_gibbs_increments(LAW, 0.4, 300, seed=1)
    assert np.array_equal(path.increments, again.increments)


def test_p_one_and_argument_checks():
    path = sample_gibbs_increments(LAW, 1.0, 200, seed=3)
    assert np.all(path.increments == 1)
    with pytest.raises(ValueError):
        sample_gibbs_increments(LAW, 1.2, 10, seed=1)
    with pytest.raises(ValueError):
        sample_gibbs_increments(LAW, 0.5, 100, B=50, seed=1)


def test_delta1_single_component():
    ens = gibbs_ensemble(finite_law([1.0]), 0.3, 50, 10_000, lambda x: (x[0], abs(x.sum())), 2,
                         seed=2)
    assert np.all(ens.stats[:, 1] == 50)
    freq = (ens.stats[:, 0] == 1).mean()
    assert abs(freq - 0.3) < 3 * np.sqrt(0.21 / 10_000)


def test_thread_count_does_not_matter():
    a = gibbs_ensemble(LAW, 0.5, 128, 300, endpoint, 1, seed=11, threads=1)
    b = gibbs_ensemble(LAW, 0.5, 128, 300, endpoint, 1, seed=11, threads=5)
    assert np.array_equal(a.stats, b.stats)
    assert np.array_equal(a.risk, b.risk, equal_nan=True)


def test_mean_and_variance_n512():
    n, reps, p = 512, 10_000, 0.5
    ens = gibbs_ensemble(LAW, p, n, reps, endpoint, 1, seed=5, risk_reps=reps)
    s = ens.stats[:, 0]
    se_mean = s.std(ddof=1) / np.sqrt(reps)
    assert abs(s.mean()) < 3 * se_mean
    v = s.var(ddof=1)
    d = s - s.mean()
    se_var = np.sqrt(max(np.mean(d ** 4) - v * v, 0) / reps)
    exact = exact_variance(p, correlations_for(LAW, n), n)
    assert abs(v - exact) <= 3 * se_var + ens.variance_deficit


def test_mean_identity_per_index():
    p, n, reps = 0.3, 64, 4000
    ens = gibbs_ensemble(LAW, p, n, reps, lambda x: x.astype(float), n, seed=8)
    pooled = ens.stats.mean()
    # pooled over correlated indices: bound with the variance of the row means
    row = ens.stats.mean(axis=1)
    assert abs(pooled - (2 * p - 1)) < 3 * row.std(ddof=1) / np.sqrt(reps)


def test_colour_flip_symmetry():
    a = gibbs_ensemble(LAW, 0.3, 128, 10_000, endpoint, 1, seed=21).stats[:, 0]
    b = gibbs_ensemble(LAW, 0.7, 128, 10_000, endpoint, 1, seed=22).stats[:, 0]
    assert stats.ks_2samp(-a, b).pvalue > 0.001


def test_risk_decreases_with_depth():
    shallow = gibbs_ensemble(LAW, 0.5, 256, 100, endpoint, 1, B=8 * 256, seed=4)
    deep = gibbs_ensemble(LAW, 0.5, 256, 100, endpoint, 1, B=10 ** 4 * 256, seed=4)
    assert deep.variance_deficit < shallow.variance_deficit
    assert deep.coalescence_risk <= shallow.coalescence_risk


def test_regime_warning():
    with pytest.warns(RuntimeWarning, match="one component"):
        sample_gibbs_increments(make_tail_law(0.75), 0.5, 20, seed=1)


def test_adjusted_walk_delta1():
    path = sample_adjusted_walk(finite_law([1.0]), 100, seed=3)
    assert path.diagnostics.fresh_coins == 1
    assert abs(path.positions[-1]) == 100


def _fresh(alpha, n, reps=20):
    law = make_tail_law(alpha)
    return np.mean([sample_adjusted_walk(law, n, seed=1, replica=r).diagnostics.fresh_coins
                    for r in range(reps)])


def test_adjusted_walk_fresh_coins():
    heavy = [_fresh(0.25, 2 ** k) for k in (10, 12, 14)]
    # infinite mean: the count keeps growing, roughly like n**(3/4)
    assert heavy[0] < heavy[1] < heavy[2]
    assert min(h / 2 ** k for h, k in zip(heavy, (10, 12, 14))) > 0.05
    light = [_fresh(1.5, 2 ** k) for k in (10, 14)]
    # finite mean: about zeta(3/2) fresh coins in total
    assert light[1] < 6 and light[1] / 2 ** 14 < 1e-3


def test_rescale_edges():
    corr = correlations_for(LAW, 1024)
    ct = c_tilde(LAW, 0.5, corr)
    path = sample_gibbs_increments(LAW, 0.5, 256, seed=9)
    r = rescale(path, LAW, ct, 256, [0.0, 0.5, 1.0])
    assert r.values[0] == 0
    one = sample_gibbs_increments(LAW, 1.0, 256, seed=9)
    assert np.allclose(rescale(one, LAW, ct, 256, [0.1, 0.37, 1.0]).values, 0.0, atol=1e-12)
    with pytest.raises(ValueError):
        rescale(path, LAW, ct, 256, [1.01])
    # linear interpolation between integer times
    half = rescale(path, LAW, ct, 256, [1.5 / 256]).values[0]
    ends = rescale(path, LAW, ct, 256, [1 / 256, 2 / 256]).values
    assert half == pytest.approx(ends.mean(), abs=1e-12)
