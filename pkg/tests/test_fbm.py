import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracwalk.fbm import (MAX_FGN_LENGTH, FbmParams, fbm_covariance, fgn_autocovariance,
                          fgn_covariance_matrix, hurst_estimate, sample_fgn)


def test_covariance_examples():
    for H in (0.3, 0.5, 0.9):
        assert fbm_covariance(FbmParams(H), 1, 1) == pytest.approx(1.0, abs=1e-15)
    assert fbm_covariance(FbmParams(0.5), 1, 2) == pytest.approx(1.0, abs=1e-15)
    assert fbm_covariance(FbmParams(0.75), 1, 2) == pytest.approx(0.5 * 2 ** 1.5, abs=1e-14)
    assert fbm_covariance(FbmParams(0.75), 0.5, 1) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        fbm_covariance(FbmParams(0.75), -1, 1)


def test_params():
    assert FbmParams.from_alpha(0.25).H == 0.75
    for H in (0, 1, 1.2):
        with pytest.raises(ValueError):
            FbmParams(H)


def test_autocovariance_examples():
    assert fgn_autocovariance(FbmParams(0.7), 0) == 1
    assert np.allclose(fgn_autocovariance(FbmParams(0.5), np.arange(1, 20)), 0, atol=1e-15)
    assert fgn_autocovariance(FbmParams(0.75), 1) == pytest.approx(0.5 * (2 ** 1.5 - 2), abs=1e-15)


@pytest.mark.parametrize("H", [0.55, 0.75, 0.95])
def test_telescoping_sum(H):
    for n in (1, 2, 17, 100, 512):
        total = fgn_covariance_matrix(FbmParams(H), n).sum()
        assert total == pytest.approx(n ** (2 * H), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(H=st.floats(0.51, 0.99), k=st.integers(1, 10 ** 6))
def test_positive_increment_correlation(H, k):
    assert fgn_autocovariance(FbmParams(H), k) > 0


def test_sampler_moments_and_determinism():
    p = FbmParams(0.75)
    x = sample_fgn(p, 16, seed=3, size=10 ** 4)
    se = 1 / np.sqrt(10 ** 4)
    assert np.all(np.abs(x.mean(axis=0)) < 4 * se)
    lag1 = np.mean(x[:, :-1] * x[:, 1:])
    assert abs(lag1 - fgn_autocovariance(p, 1)) < 3 * np.sqrt((1 + 0.41421 ** 2) / (15 * 10 ** 4)) * 4
    assert np.array_equal(sample_fgn(p, 16, seed=3, size=10 ** 4), x)
    assert sample_fgn(p, 16, seed=3).shape == (16,)


def test_white_noise_runs():
    x = sample_fgn(FbmParams(0.5), 4000, seed=12)
    signs = x > 0
    runs = 1 + np.count_nonzero(signs[1:] != signs[:-1])
    n1 = signs.sum()
    n0 = len(x) - n1
    mu = 2 * n1 * n0 / len(x) + 1
    var = (mu - 1) * (mu - 2) / (len(x) - 1)
    assert abs(runs - mu) < 4 * np.sqrt(var)


def test_sampler_limits():
    with pytest.raises(ValueError):
        sample_fgn(FbmParams(0.7), MAX_FGN_LENGTH + 1, seed=1)
    with pytest.raises(ValueError):
        sample_fgn(FbmParams(0.7), 0, seed=1)


def test_hurst_estimate():
    n = 2.0 ** np.arange(4, 12)
    H, se = hurst_estimate(list(zip(n, n ** 1.5)))
    assert H == pytest.approx(0.75, abs=1e-12)
    assert se < 1e-12
    H, _ = hurst_estimate(list(zip(n, 3.0 * n ** 1.2)))
    assert H == pytest.approx(0.6, abs=1e-12)
    with pytest.raises(ValueError):
        hurst_estimate([(1, 1.0), (2, 2.0), (4, 0.0), (8, 3.0)])
    with pytest.raises(ValueError):
        hurst_estimate([(1, 1.0), (2, 2.0), (4, 3.0)])


def test_hurst_from_exact_curve():
    from fracwalk.diagnostics import correlations_for
    from fracwalk.laws import make_tail_law
    from fracwalk.renewal import exact_variance
    corr = correlations_for(make_tail_law(0.25), 2 ** 14)
    n = 2 ** np.arange(8, 15)
    H, _ = hurst_estimate(list(zip(n, exact_variance(0.5, corr, n))))
    assert 0.70 <= H <= 0.78
