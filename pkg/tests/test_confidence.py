import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from smallfdr.confidence import (
    PosteriorKind,
    PosteriorSummary,
    confidence_cdf,
    confidence_posterior,
    confidence_quantile,
    equal_tail_interval,
    improper_bayes_posterior,
    observed_confidence_null,
    signed_confidence_cdf,
)
from smallfdr.errors import DomainError, UnsupportedModelError
from smallfdr.special_functions import INFINITE, normal_cdf, normal_quantile


def bisect(f, target, lo=0.0, hi=100.0, tol=1e-10):
    """Smallest x with f(x) >= target for nondecreasing f, by plain bisection."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def folded_normal_tail(u, theta):
    return stats.norm.sf(u - theta) + stats.norm.cdf(-u - theta)


class TestObservedConfidence:
    def test_anchors(self):
        assert observed_confidence_null(0.0, INFINITE) == 1.0
        assert observed_confidence_null(0.0, 3.0) == 1.0
        assert observed_confidence_null(2.0, INFINITE) == pytest.approx(0.0455, abs=5e-5)
        assert observed_confidence_null(2.0, INFINITE) == pytest.approx(2 * (1 - 0.97725), abs=1e-4)

    def test_one_sided_p_value(self):
        assert 1 - normal_cdf(2.0) == pytest.approx(0.0228, abs=5e-5)

    @pytest.mark.parametrize("df", [3, 12, 60])
    def test_student_two_sided_p_value(self, df):
        for u in (0.5, 2.0, 4.5):
            assert observed_confidence_null(u, df) == pytest.approx(2 * stats.t.sf(u, df), rel=1e-10)

    def test_negative_u(self):
        with pytest.raises(DomainError):
            observed_confidence_null(-0.5)


class TestConfidenceCdf:
    def test_examples(self):
        assert confidence_cdf(0.0, 2.0) == pytest.approx(0.0455, abs=5e-5)
        assert confidence_cdf(2.0, 2.0) == pytest.approx(0.50003, abs=5e-6)
        assert confidence_cdf(60.0, 3.0) == 1.0

    @given(u=st.floats(0, 15), df=st.sampled_from([INFINITE, 2.0, 9.0, 40.0]))
    @settings(max_examples=100, deadline=None)
    def test_atom_identity_and_monotone(self, u, df):
        assert confidence_cdf(0.0, u, df) == observed_confidence_null(u, df)
        c = confidence_cdf(np.linspace(0, 25, 51), u, df)
        assert np.all(np.diff(c) >= -1e-13)
        # heavy tails at small df need a large effect before the limit shows
        assert confidence_cdf(40.0 * (u + 5.0), u, df) == pytest.approx(1.0, abs=1e-9)

    def test_negative_theta(self):
        with pytest.raises(DomainError):
            confidence_cdf(-1.0, 2.0)

    @pytest.mark.parametrize("theta", [0.0, 2.0, 4.0])
    def test_calibration_ks(self, theta):
        rng = np.random.default_rng(20 + int(theta))
        u = np.abs(rng.standard_normal(100_000) + theta)
        values = confidence_cdf(theta, u, INFINITE)
        assert stats.kstest(values, "uniform").pvalue > 1e-3

    def test_calibration_finite_df(self):
        rng = np.random.default_rng(7)
        df, theta = 6.0, 1.5
        t = stats.nct.rvs(df, theta, size=20_000, random_state=rng)
        values = confidence_cdf(theta, np.abs(t), df)
        assert stats.kstest(values, "uniform").pvalue > 1e-3


class TestConfidenceQuantile:
    def test_atom_absorbs(self):
        assert confidence_quantile(0.025, 2.0) == 0.0
        assert confidence_quantile(0.975, 0.0) == 0.0

    @pytest.mark.parametrize("u,beta", [(4.0, 0.975), (4.0, 0.025), (2.0, 0.5), (7.5, 0.9), (1.0, 0.999)])
    def test_bisection_oracle(self, u, beta):
        expected = bisect(lambda th: folded_normal_tail(u, th), beta)
        assert confidence_quantile(beta, u) == pytest.approx(expected, abs=1e-6)

    def test_bisection_oracle_finite_df(self):
        # scipy's nct returns nan for large noncentrality, so keep the bracket tight
        expected = bisect(lambda th: 1 - stats.nct.cdf(3.0, 8, th) + stats.nct.cdf(-3.0, 8, th), 0.9, hi=20.0)
        assert confidence_quantile(0.9, 3.0, 8) == pytest.approx(expected, abs=1e-6)

    @given(u=st.floats(0, 12), beta=st.floats(0.001, 0.999))
    @settings(max_examples=150, deadline=None)
    def test_round_trip(self, u, beta):
        q = confidence_quantile(beta, u)
        c = confidence_cdf(q, u)
        assert c >= beta
        if q > 0:
            assert c == pytest.approx(beta, abs=1e-9)
            assert confidence_cdf(max(q - 1e-6, 0.0), u) < beta

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 1.3])
    def test_domain(self, beta):
        with pytest.raises(DomainError):
            confidence_quantile(beta, 1.0)


class TestConfidencePosterior:
    def test_summary(self):
        post = confidence_posterior(2.0)
        assert post.kind is PosteriorKind.CONFIDENCE_FOLDED
        assert post.null_mass == pytest.approx(0.0455, abs=5e-5)
        assert not post.degenerate
        assert post.cdf(-1.0) == 0.0
        lo, hi = equal_tail_interval(post, 0.05)
        assert lo == 0.0
        assert hi == pytest.approx(bisect(lambda th: folded_normal_tail(2.0, th), 0.975), abs=1e-6)

    def test_zero_statistic_is_degenerate(self):
        post = confidence_posterior(0.0)
        assert post.degenerate
        assert post.interval(0.05) == (0.0, 0.0)

    @pytest.mark.parametrize("theta,level", [(0.0, 0.975), (2.0, 0.95), (4.0, 0.95)])
    def test_coverage(self, theta, level):
        # At theta = 0 the atom makes the lower limit 0 whenever the lower tail
        # would fall below it, so only the upper tail can miss.
        rng = np.random.default_rng(90 + int(theta))
        n = 4000
        u = np.abs(rng.standard_normal(n) + theta)
        covered = 0
        for x in u:
            lo, hi = confidence_posterior(float(x)).interval(0.05)
            covered += lo <= theta <= hi
        sigma = math.sqrt(level * (1 - level) / n)
        assert abs(covered / n - level) <= 3 * sigma


class TestSignedConfidence:
    def test_normal_case(self):
        theta = np.linspace(-3, 5, 17)
        np.testing.assert_allclose(signed_confidence_cdf(theta, 1.2), stats.norm.cdf(theta - 1.2), rtol=1e-13)

    def test_student_case(self):
        theta = np.linspace(-3, 5, 17)
        np.testing.assert_allclose(signed_confidence_cdf(theta, 1.2, 5), stats.t.cdf(theta - 1.2, 5), rtol=1e-10)


class TestImproperBayes:
    def test_no_null_mass(self):
        post = improper_bayes_posterior(1.3)
        assert post.kind is PosteriorKind.IMPROPER_BAYES_FOLDED
        assert post.null_mass == 0.0
        assert post.cdf(0.0) == 0.0

    def test_median_at_zero(self):
        post = improper_bayes_posterior(0.0)
        assert post.quantile(0.5) == pytest.approx(0.6745, abs=5e-5)
        assert post.quantile(0.5) == pytest.approx(normal_quantile(0.75), abs=1e-9)

    def test_interval_at_zero(self):
        lo, hi = improper_bayes_posterior(0.0).interval(0.05)
        cdf = lambda th: stats.norm.cdf(th) - stats.norm.cdf(-th)
        assert lo == pytest.approx(bisect(cdf, 0.025), abs=1e-6)
        assert hi == pytest.approx(bisect(cdf, 0.975), abs=1e-6)

    def test_sign_symmetry(self):
        a = improper_bayes_posterior(-2.1).interval(0.1)
        b = improper_bayes_posterior(2.1).interval(0.1)
        assert a == b

    @given(t=st.floats(-10, 10))
    @settings(max_examples=60, deadline=None)
    def test_cdf_properties(self, t):
        post = improper_bayes_posterior(t)
        c = post.cdf(np.linspace(0, 25, 101))
        assert c[0] == 0.0
        assert np.all(np.diff(c) >= 0)
        assert c[-1] == pytest.approx(1.0, abs=1e-12)

    def test_finite_df_unsupported(self):
        with pytest.raises(UnsupportedModelError):
            improper_bayes_posterior(1.0, 10)


class TestPosteriorSummary:
    def test_validation(self):
        with pytest.raises(DomainError):
            PosteriorSummary(PosteriorKind.CONFIDENCE_FOLDED, 1.5, 1.0)
        with pytest.raises(DomainError):
            PosteriorSummary(PosteriorKind.IMPROPER_BAYES_FOLDED, 0.2, 1.0)
        with pytest.raises(DomainError):
            PosteriorSummary(PosteriorKind.EB_DISCRETE, 0.2, 1.0)

    def test_interval_alpha_domain(self):
        with pytest.raises(DomainError):
            equal_tail_interval(confidence_posterior(1.0), 0.0)

    @given(u=st.floats(0, 10), alpha=st.floats(0.01, 0.5))
    @settings(max_examples=60, deadline=None)
    def test_lower_not_above_upper(self, u, alpha):
        lo, hi = confidence_posterior(u).interval(alpha)
        assert 0.0 <= lo <= hi
