import numpy as np
import pytest

from fracwalk.diagnostics import (FUNCTIONALS, covariance_compare, fkg_test, gaussianity_check,
                                  iid_covariance_control, max_statistics, variance_compare)
from fracwalk.laws import finite_law, make_tail_law

LAW = make_tail_law(0.25)


def test_variance_compare_small():
    rep = variance_compare(LAW, 0.5, [1, 64], 4000, seed=3)
    assert rep.passed
    first = rep.rows[0]
    assert first["key"] == 1 and first["exact"] == pytest.approx(1.0, abs=1e-15)
    assert all(r["stderr"] > 0 for r in rep.rows)
    again = variance_compare(LAW, 0.5, [1, 64], 4000, seed=3)
    assert again.to_dict() == rep.to_dict()


def test_variance_compare_delta1():
    rep = variance_compare(finite_law([1.0]), 0.3, [10, 40], 10_000, seed=1)
    assert rep.passed
    assert rep.rows[1]["exact"] == pytest.approx(4 * 0.21 * 1600)


def test_variance_compare_rejects_divergent():
    with pytest.raises(ValueError):
        variance_compare(make_tail_law(0.75), 0.5, [8], 10, seed=1)


def test_covariance_compare_small():
    rep = covariance_compare(LAW, 0.5, 256, [(0.5, 1.0), (1.0, 1.0)], 2000, seed=2)
    assert [tuple(r["key"]) for r in rep.rows] == [(0.5, 1.0), (1.0, 1.0)]
    assert rep.rows[0]["exact"] == pytest.approx(0.5, abs=1e-15)
    assert rep.passed


def test_iid_control():
    rep = iid_covariance_control(0.5, 2 ** 14, 0.5, 1.0, 10_000, seed=4)
    assert rep.passed


def test_gaussianity_on_gaussian_and_coin_walk():
    rng = np.random.default_rng(0)
    g = gaussianity_check(rng.standard_normal(10_000), 1.0)
    assert g.passed and g.ks_pvalue > 0.001
    walk = 2.0 * rng.binomial(2 ** 14, 0.5, size=10_000) - 2 ** 14
    g = gaussianity_check(walk / 2 ** 7, 1.0)
    assert g.passed
    skewed = gaussianity_check(rng.exponential(size=10_000))
    assert not skewed.passed


def test_fkg_delta1_exact_covariance():
    p, n = 0.3, 64
    rep = fkg_test(finite_law([1.0]), p, n, 10_000, seed=5, functionals=["S_n", "S_half"])
    row = next(r for r in rep.rows if r["key"] == "S_n*S_half")
    target = 4 * p * (1 - p) * (n // 2) * n
    assert abs(row["mc_estimate"] - target) <= 3 * row["stderr"]
    assert rep.passed


def test_fkg_power_law():
    rep = fkg_test(LAW, 0.5, 128, 4000, seed=6)
    assert len(rep.rows) == len(FUNCTIONALS) * (len(FUNCTIONALS) + 1) // 2
    assert rep.passed


def test_fkg_rejects_decreasing():
    with pytest.raises(ValueError, match="decreasing"):
        fkg_test(LAW, 0.5, 16, 10, seed=1, functionals=["S_n", "B_0n"])


def test_max_statistics():
    ms = max_statistics(LAW, 0.5, 512, 1000, [0.0, 0.5, 1.0, 2.0, 4.0], seed=7)
    assert ms.identity_error == 0
    assert np.all(ms.A >= 0) and np.all(ms.B >= 0)
    assert ms.monotone
    assert ms.tail_freq[0] > 0.9
    with pytest.raises(ValueError):
        max_statistics(make_tail_law(0.75), 0.5, 16, 10, [1.0], seed=1)


def test_max_tail_at_calibrated_threshold():
    from fracwalk.diagnostics import correlations_for
    from fracwalk.renewal import c_tilde
    ct = c_tilde(LAW, 0.5, correlations_for(LAW, 1024))
    ms = max_statistics(LAW, 0.5, 2 ** 12, 2000, [0.0, 1 / ct, 8 / ct], seed=8)
    assert ms.tail_freq[-1] < 0.05
    assert ms.monotone
