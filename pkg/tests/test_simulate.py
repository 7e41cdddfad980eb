import io
import math

import numpy as np
import pytest
from scipy import integrate, stats

from smallfdr.errors import DomainError
from smallfdr.simulate import (
    CSV_COLUMNS,
    DEFAULT_LFDR_BOUNDS,
    MethodKind,
    MethodSpec,
    SimulationConfig,
    SimulationReport,
    default_pi1_grid,
    draw_statistics,
    method_posterior,
    null_probability,
    run_coverage_study,
    run_rmse_study,
    weighted_mix,
)

GRID = (0.0, 0.05, 0.2, 0.5, 0.8, 0.9, 1.0)


def improper_bayes_coverage(delta, alpha=0.05):
    """Exact coverage of the folded flat-prior interval when t ~ N(delta, 1)."""
    F = lambda t: stats.norm.cdf(delta - t) - stats.norm.cdf(-delta - t)
    g = lambda t: stats.norm.pdf(t - delta) * (alpha / 2 <= F(t) <= 1 - alpha / 2)
    z = stats.norm.ppf(1 - alpha / 2)
    return integrate.quad(g, delta - 12, delta + 12, limit=500, points=[delta - z, delta + z])[0]


class TestMethodSpec:
    def test_labels_round_trip(self):
        for m in (
            MethodSpec.zero_posterior(),
            MethodSpec.observed_confidence(),
            MethodSpec.improper_bayes(),
            MethodSpec.lfdr(0.9),
            MethodSpec.lfdr(0.25, 0.75),
        ):
            assert MethodSpec.parse(m.label) == m
        assert MethodSpec.lfdr(0.9).label == "lfdr[0.9,1]"

    def test_validation(self):
        with pytest.raises(DomainError):
            MethodSpec(MethodKind.LFDR)
        with pytest.raises(DomainError):
            MethodSpec(MethodKind.OBSERVED_CONFIDENCE, (0.0, 1.0))
        with pytest.raises(DomainError):
            MethodSpec.parse("bogus")
        with pytest.raises(DomainError):
            MethodSpec.lfdr(0.7, 0.6)


class TestConfig:
    def test_defaults(self):
        c = SimulationConfig()
        assert c.null_delta == 0.0
        assert c.pi1_grid == default_pi1_grid()
        assert len(c.pi1_grid) == 101 and c.pi1_grid[1] == 0.01
        labels = [m.label for m in c.resolved_methods("rmse")]
        assert labels == ["zero_posterior", "observed_confidence"] + [f"lfdr[{lo:g},{hi:g}]" for lo, hi in DEFAULT_LFDR_BOUNDS]
        assert c.resolved_methods("coverage")[0].kind is MethodKind.IMPROPER_BAYES

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alt_delta": 0.0},
            {"n_null_reps": 0},
            {"pi1_grid": (0.5, 1.2)},
            {"pi1_grid": ()},
            {"alpha": 1.0},
            {"seed": -1},
            {"methods": ()},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            SimulationConfig(**kwargs)


class TestWeightedMix:
    def test_examples(self):
        assert weighted_mix(0.3, 0.8, 0.0) == 0.3
        assert weighted_mix(0.3, 0.8, 1.0) == 0.8
        assert weighted_mix(1.0, 0.0, 0.5) == 0.5

    def test_domain(self):
        with pytest.raises(DomainError):
            weighted_mix(1.0, 0.0, 1.5)


class TestDraws:
    def test_streams_are_independent_of_count(self):
        a = draw_statistics(5, "rmse", 0, 10, 0.0)
        b = draw_statistics(5, "rmse", 0, 25, 0.0)
        np.testing.assert_array_equal(a, b[:10])

    def test_streams_differ_by_arm_and_study(self):
        base = draw_statistics(5, "rmse", 0, 50, 0.0)
        assert not np.array_equal(base, draw_statistics(5, "rmse", 1, 50, 0.0))
        assert not np.array_equal(base, draw_statistics(5, "coverage", 0, 50, 0.0))
        assert not np.array_equal(base, draw_statistics(6, "rmse", 0, 50, 0.0))

    def test_distribution(self):
        u = draw_statistics(1, "rmse", 1, 5000, 2.0)
        assert np.all(u >= 0)
        cdf = lambda x: stats.norm.cdf(x - 2.0) - stats.norm.cdf(-x - 2.0)
        assert stats.kstest(u, cdf).pvalue > 1e-3


class TestPerDrawMethods:
    def test_null_probabilities(self):
        assert null_probability(MethodSpec.zero_posterior(), 1.0) == 0.0
        assert null_probability(MethodSpec.improper_bayes(), 1.0) == 0.0
        assert null_probability(MethodSpec.observed_confidence(), 2.0) == pytest.approx(0.0455, abs=5e-5)
        assert null_probability(MethodSpec.lfdr(1.0), 2.0) == 1.0
        p = null_probability(MethodSpec.lfdr(0.5), 3.0)
        # pi0 sits at the bound and delta at the statistic
        f0 = 2 * stats.norm.pdf(3.0)
        f1 = stats.norm.pdf(0.0) + stats.norm.pdf(6.0)
        assert p == pytest.approx(f0 / (f0 + f1), rel=1e-5)

    def test_zero_posterior_has_no_interval(self):
        with pytest.raises(DomainError):
            method_posterior(MethodSpec.zero_posterior(), 1.0)


@pytest.fixture(scope="module")
def rmse_report():
    return run_rmse_study(SimulationConfig(n_null_reps=400, n_alt_reps=400, pi1_grid=GRID, seed=3))


@pytest.fixture(scope="module")
def coverage_report():
    return run_coverage_study(SimulationConfig(n_null_reps=800, n_alt_reps=800, pi1_grid=GRID, seed=4))


class TestRmseStudy:
    @pytest.fixture
    def report(self, rmse_report):
        return rmse_report

    def test_zero_posterior_is_analytic(self, report):
        pi1, value = report.curve("zero_posterior")
        np.testing.assert_allclose(value, np.sqrt(1 - pi1), rtol=0, atol=1e-12)

    def test_observed_confidence_null_limit(self):
        config = SimulationConfig(
            n_null_reps=20_000, n_alt_reps=1, pi1_grid=(0.0,), seed=8, methods=(MethodSpec.observed_confidence(),)
        )
        assert run_rmse_study(config).value("observed_confidence", 0.0) == pytest.approx(math.sqrt(1 / 3), abs=0.01)

    def test_pinned_lfdr_is_exact_under_null(self):
        config = SimulationConfig(n_null_reps=50, n_alt_reps=50, pi1_grid=(0.0, 1.0), methods=(MethodSpec.lfdr(1.0),))
        report = run_rmse_study(config)
        assert report.value("lfdr[1,1]", 0.0) == 0.0
        assert report.value("lfdr[1,1]", 1.0) == 1.0

    def test_rmse_at_null_nonincreasing_in_lower_bound(self, report):
        values = [report.value(f"lfdr[{b:g},1]", 0.0) for b, _ in DEFAULT_LFDR_BOUNDS]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_values_nonnegative(self, report):
        assert all(r.value >= 0 for r in report.rows)
        assert all(r.metric == "rmse" and r.seed == 3 for r in report.rows)

    def test_larger_effect_is_easier(self, report):
        other = run_rmse_study(SimulationConfig(alt_delta=4.0, n_null_reps=400, n_alt_reps=400, pi1_grid=GRID, seed=3))
        for label in report.methods:
            e2, e4 = report.alt_values[label], other.alt_values[label]
            slack = 3 * math.sqrt(e2.var() / e2.size + e4.var() / e4.size)
            assert e4.mean() <= e2.mean() + slack, label

    def test_reproducible(self, report):
        again = run_rmse_study(SimulationConfig(n_null_reps=400, n_alt_reps=400, pi1_grid=GRID, seed=3))
        assert again.rows == report.rows
        a, b = io.StringIO(), io.StringIO()
        report.write_csv(a)
        again.write_csv(b)
        assert a.getvalue() == b.getvalue()

    def test_csv_round_trip(self, report, tmp_path):
        path = tmp_path / "rmse.csv"
        report.to_csv(path)
        assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
        back = SimulationReport.from_csv(path)
        assert back.study == "rmse"
        assert back.rows == report.rows


class TestCoverageStudy:
    @pytest.fixture
    def report(self, coverage_report):
        return coverage_report

    def test_values_are_rates(self, report):
        assert all(0.0 <= r.value <= 1.0 and r.metric == "coverage" for r in report.rows)

    def test_confidence_method_arms(self, report):
        # exactly 0.95 off the null; 0.975 at the null, where the atom absorbs the lower tail
        c0 = report.null_values["observed_confidence"].mean()
        c1 = report.alt_values["observed_confidence"].mean()
        assert abs(c0 - 0.975) <= 3 * math.sqrt(0.975 * 0.025 / 800)
        assert abs(c1 - 0.95) <= 3 * math.sqrt(0.95 * 0.05 / 800)

    def test_lfdr_extremes(self, report):
        assert report.value("lfdr[0.9,1]", 0.0) > 0.99
        assert report.value("lfdr[0.9,1]", 1.0) < 0.5

    def test_improper_bayes_against_exact_coverage(self, report):
        exact = improper_bayes_coverage(2.0)
        assert exact == pytest.approx(0.975, abs=1e-4)
        got = report.value("improper_bayes", 1.0)
        assert abs(got - exact) <= 3 * math.sqrt(exact * (1 - exact) / 800)
        # no mass on the null: never covers zero
        assert report.value("improper_bayes", 0.0) == 0.0

    def test_improper_bayes_nominal_for_large_effect(self):
        config = SimulationConfig(
            alt_delta=4.0, n_null_reps=1, n_alt_reps=2000, pi1_grid=(1.0,), seed=12, methods=(MethodSpec.improper_bayes(),)
        )
        got = run_coverage_study(config).value("improper_bayes", 1.0)
        assert improper_bayes_coverage(4.0) == pytest.approx(0.95, abs=1e-4)
        assert abs(got - 0.95) <= 3 * math.sqrt(0.95 * 0.05 / 2000)

    def test_rejects_zero_posterior(self):
        with pytest.raises(DomainError):
            run_coverage_study(SimulationConfig(methods=(MethodSpec.zero_posterior(),)))
