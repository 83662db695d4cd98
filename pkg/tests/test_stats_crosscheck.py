"""Cross-validation of the two-sample tests against scipy, when available.

These are belt-and-braces checks on top of the in-repo enumeration oracles;
they skip silently in environments without scipy (it is not a dependency).
Note scipy's two-sample KS "asymp" uses a finite-n refinement, so its
asymptotic p is compared against scipy.special.kolmogorov (the pure limit
this package implements) rather than ks_2samp.
"""

import math

import numpy as np
import pytest

scipy_stats = pytest.importorskip("scipy.stats")
scipy_special = pytest.importorskip("scipy.special")

from hydet.stats import TestConfig, ks_two_sample, mwu_two_sample


def test_mwu_asymptotic_matches_scipy_with_ties():
    rng = np.random.default_rng(10)
    for _ in range(150):
        n1, n2 = rng.integers(2, 12, 2)
        a = (rng.integers(0, 6, n1) * 0.5).tolist()
        b = (rng.integers(0, 6, n2) * 0.5).tolist()
        mine = mwu_two_sample(a, b, TestConfig(method="asymptotic"))
        try:
            ref = scipy_stats.mannwhitneyu(a, b, alternative="two-sided",
                                           method="asymptotic",
                                           use_continuity=True)
        except ValueError:  # scipy rejects fully tied pooled samples
            assert mine.p_value == 1.0
            continue
        assert mine.u_statistic == ref.statistic
        assert mine.p_value == pytest.approx(min(ref.pvalue, 1.0), abs=1e-12)


def test_ks_exact_matches_scipy_on_tie_free_samples():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n1, n2 = rng.integers(2, 7, 2)
        vals = rng.permutation(100)[:n1 + n2].astype(float)
        a, b = vals[:n1].tolist(), vals[n1:].tolist()
        mine = ks_two_sample(a, b, TestConfig(method="exact"))
        ref = scipy_stats.ks_2samp(a, b, method="exact")
        assert mine.statistic == pytest.approx(ref.statistic, abs=1e-15)
        assert mine.p_value == pytest.approx(ref.pvalue, abs=1e-12)


def test_mwu_exact_matches_scipy_on_tie_free_samples():
    rng = np.random.default_rng(12)
    for _ in range(60):
        n1, n2 = rng.integers(2, 7, 2)
        vals = rng.permutation(100)[:n1 + n2].astype(float)
        a, b = vals[:n1].tolist(), vals[n1:].tolist()
        mine = mwu_two_sample(a, b, TestConfig(method="exact"))
        ref = scipy_stats.mannwhitneyu(a, b, alternative="two-sided",
                                       method="exact")
        assert mine.u_statistic == ref.statistic
        assert mine.p_value == pytest.approx(ref.pvalue, abs=1e-12)


def test_ks_asymptotic_equals_kolmogorov_limit():
    rng = np.random.default_rng(13)
    for _ in range(150):
        n1, n2 = rng.integers(5, 60, 2)
        a = rng.normal(size=n1).tolist()
        b = rng.normal(rng.uniform(0, 1), size=n2).tolist()
        mine = ks_two_sample(a, b, TestConfig(method="asymptotic"))
        lam = mine.statistic * math.sqrt(n1 * n2 / (n1 + n2))
        assert mine.p_value == pytest.approx(float(scipy_special.kolmogorov(lam)),
                                             abs=1e-12)
