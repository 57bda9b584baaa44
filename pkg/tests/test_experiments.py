"""Tests for the Monte Carlo harness and the censoring experiment."""

import csv

import numpy as np
import pytest

from conftest import make_random_cdf
from ifsdist.baselines import BetaParams, beta_sample, edf
from ifsdist.errors import BenchmarkError, DegenerateSampleError, NoDataError
from ifsdist.maps import MapKind, SupportInterval, UNIT_SUPPORT
from ifsdist.moments import Sample
from ifsdist.rng import RandomStream
import ifsdist.experiments as experiments
from ifsdist.experiments import (
    BenchmarkConfig,
    CensorWindows,
    DEFAULT_CENSOR_WINDOWS,
    amse,
    apply_window_censoring,
    fit_ifs,
    metric_grid,
    run_benchmark,
    run_missing_data_experiment,
    sup_distance,
    write_benchmark_csv,
)


class TestMetricGrid:
    def test_interior_equispaced(self):
        g = metric_grid(UNIT_SUPPORT, 4)
        assert np.allclose(g, [0.2, 0.4, 0.6, 0.8])

    def test_respects_support(self):
        g = metric_grid(SupportInterval(2.0, 6.0), 3)
        assert np.allclose(g, [3.0, 4.0, 5.0])


class TestMetrics:
    def test_zero_when_equal(self):
        f = lambda x: np.asarray(x) ** 2
        assert amse(f, f) == 0.0
        assert sup_distance(f, f) == 0.0

    def test_constant_offset(self):
        f = lambda x: np.clip(np.asarray(x), 0, 1)
        g = lambda x: np.clip(np.asarray(x), 0, 1) + 0.1
        assert amse(f, g) == pytest.approx(0.01)
        assert sup_distance(f, g) == pytest.approx(0.1)

    def test_edf_against_uniform_truth_is_bounded(self):
        values = RandomStream(3).uniforms(10)
        est = lambda x: edf(values, x)
        truth = lambda x: np.asarray(x)
        value = amse(est, truth)
        assert 0.0 < value < 0.25

    def test_sup_dominates_root_amse(self, stream):
        for _ in range(20):
            F = make_random_cdf(stream, 64)
            G = make_random_cdf(stream, 64)
            est = lambda x: F(x)
            truth = lambda x: G(x)
            assert sup_distance(est, truth) >= np.sqrt(amse(est, truth)) - 1e-12


class TestCensorWindows:
    def test_rejects_overlapping(self):
        with pytest.raises(ValueError):
            CensorWindows(((0.1, 0.5), (0.4, 0.6)))

    def test_rejects_empty_window(self):
        with pytest.raises(ValueError):
            CensorWindows(((0.5, 0.5),))

    def test_contains(self):
        w = DEFAULT_CENSOR_WINDOWS
        assert w.contains(np.array([0.12, 0.5, 0.75])).tolist() == [True, False, True]

    def test_gaps_complement_windows(self):
        gaps = DEFAULT_CENSOR_WINDOWS.gaps(UNIT_SUPPORT)
        assert gaps == ((0.0, 0.1), (0.15, 0.37), (0.43, 0.7), (0.8, 1.0))


class TestWindowCensoring:
    def test_full_support_window_is_identity(self):
        s = Sample(values=np.array([0.2, 0.5, 0.8]), support=UNIT_SUPPORT)
        wide = CensorWindows(((-0.01, 1.01),))
        out = apply_window_censoring(s, wide)
        assert np.array_equal(out.values, s.values)

    def test_membership(self):
        s = Sample(values=np.array([0.12, 0.5, 0.75]), support=UNIT_SUPPORT)
        out = apply_window_censoring(s, DEFAULT_CENSOR_WINDOWS)
        assert out.values.tolist() == [0.12, 0.75]
        assert out.support == s.support

    def test_empty_result_raises(self):
        s = Sample(values=np.array([0.5]), support=UNIT_SUPPORT)
        with pytest.raises(NoDataError):
            apply_window_censoring(s, DEFAULT_CENSOR_WINDOWS)

    def test_retained_fraction_matches_window_mass(self):
        # oracle: Beta(2,2) CDF is 3x^2 - 2x^3; window mass from differences
        F = lambda x: 3 * x**2 - 2 * x**3
        mass = sum(F(hi) - F(lo) for lo, hi in DEFAULT_CENSOR_WINDOWS.windows)
        n = 500
        values = beta_sample(BetaParams(2, 2), n, RandomStream(123))
        out = apply_window_censoring(Sample(values=values, support=UNIT_SUPPORT), DEFAULT_CENSOR_WINDOWS)
        sigma = np.sqrt(mass * (1 - mass) / n)
        assert abs(out.values.size / n - mass) < 4 * sigma


class TestFitIfs:
    def test_q1_hand_example(self):
        s = Sample(values=np.array([0.0, 1 / 3, 2 / 3, 1.0]), support=UNIT_SUPPORT)
        model = fit_ifs(s, MapKind.Q1, num_quantiles=2)
        assert [(m.a, m.b) for m in model.family] == [(0.0, 0.5), (0.5, 0.5)]
        assert np.allclose(model.p, [0.5, 0.5])

    def test_default_family_sizes(self, stream):
        values = stream.uniforms(40)
        s = Sample(values=values, support=UNIT_SUPPORT)
        assert len(fit_ifs(s, MapKind.W1).family) == 62
        assert len(fit_ifs(s, MapKind.W2).family) == 28
        q1 = fit_ifs(s, MapKind.Q1)
        assert sum(q1.family.merge_counts) == 20  # n/2 quantile intervals

    def test_q1_merge_count_weighting(self):
        values = np.array([0.0, 0.0, 0.5, 1.0, 1.0])
        s = Sample(values=values, support=UNIT_SUPPORT)
        model = fit_ifs(s, MapKind.Q1, num_quantiles=4)
        assert np.allclose(model.p, [0.5, 0.5])
        assert model.family.merge_counts == (2, 2)

    def test_q2_solves_for_weights(self, stream):
        values = stream.uniforms(60)
        s = Sample(values=values, support=UNIT_SUPPORT)
        model, report = fit_ifs(s, MapKind.Q2, return_report=True)
        assert report is not None
        assert abs(model.p.sum() - 1.0) < 1e-9

    def test_propagates_degenerate_sample(self):
        s = Sample(values=np.full(6, 0.25), support=UNIT_SUPPORT)
        with pytest.raises(DegenerateSampleError):
            fit_ifs(s, MapKind.Q1)


class TestRunBenchmark:
    def tiny_config(self, **overrides):
        base = dict(
            distributions=(BetaParams(2, 2),),
            sample_sizes=(12,),
            replications=4,
            families=(MapKind.W1, MapKind.Q1),
            w1_levels=2,
            moment_order=12,
            seed=99,
        )
        base.update(overrides)
        return BenchmarkConfig(**base)

    def test_deterministic(self):
        rows_a = run_benchmark(self.tiny_config())
        rows_b = run_benchmark(self.tiny_config())
        assert rows_a == rows_b

    def test_row_layout(self):
        rows = run_benchmark(self.tiny_config())
        assert len(rows) == 4  # families x metrics
        assert {(r.family, r.metric) for r in rows} == {
            ("w1", "amse"),
            ("w1", "sup"),
            ("q1", "amse"),
            ("q1", "sup"),
        }
        for row in rows:
            assert row.ratio_percent > 0.0
            assert row.failures == 0

    def test_csv_round_trip(self, tmp_path):
        rows = run_benchmark(self.tiny_config())
        path = tmp_path / "bench.csv"
        write_benchmark_csv(rows, path)
        with open(path) as fh:
            parsed = list(csv.DictReader(fh))
        assert len(parsed) == len(rows)
        assert parsed[0]["distribution"] == "beta(2,2)"
        assert float(parsed[0]["ratio_percent"]) == rows[0].ratio_percent

    def test_failure_cap(self, monkeypatch):
        real_fit = experiments.fit_ifs
        calls = {"count": 0}

        def flaky_fit(sample, kind, **kwargs):
            calls["count"] += 1
            if kind is MapKind.W1:
                raise DegenerateSampleError("synthetic failure")
            return real_fit(sample, kind, **kwargs)

        monkeypatch.setattr(experiments, "fit_ifs", flaky_fit)
        with pytest.raises(BenchmarkError):
            run_benchmark(self.tiny_config())

    def test_failures_counted_under_cap(self, monkeypatch):
        real_fit = experiments.fit_ifs
        state = {"rep": 0}

        def sometimes_failing(sample, kind, **kwargs):
            if kind is MapKind.W1:
                state["rep"] += 1
                if state["rep"] == 1:
                    raise DegenerateSampleError("synthetic failure")
            return real_fit(sample, kind, **kwargs)

        monkeypatch.setattr(experiments, "fit_ifs", sometimes_failing)
        rows = run_benchmark(self.tiny_config(replications=30))
        w1_rows = [r for r in rows if r.family == "w1"]
        assert all(r.failures == 1 for r in w1_rows)

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            BenchmarkConfig(replications=0)
        with pytest.raises(ValueError):
            BenchmarkConfig(sample_sizes=(1,))

    def test_q2_large_sample_sup_ratio_band(self):
        # moment-matched quantile maps approach EDF efficiency at n = 250
        from ifsdist.rng import DEFAULT_SEED

        config = BenchmarkConfig(
            distributions=(BetaParams(1, 1),),
            sample_sizes=(250,),
            replications=100,
            families=(MapKind.Q2,),
            seed=DEFAULT_SEED,
        )
        rows = {r.metric: r.ratio_percent for r in run_benchmark(config)}
        assert 85.0 <= rows["sup"] <= 105.0


class TestMissingDataExperiment:
    def test_report_and_files(self, tmp_path):
        report = run_missing_data_experiment(n=300, seed=5, out_dir=str(tmp_path))
        assert report.n_total == 300
        assert 20 <= report.n_retained < 300
        assert report.amse_ratio_percent > 0.0
        assert report.sup_ratio_percent > 0.0
        names = {p.split("/")[-1] for p in report.files}
        assert names == {"curves_cdf.csv", "curves_density.csv", "ratios.csv"}
        with open(tmp_path / "curves_cdf.csv") as fh:
            header = fh.readline().strip().split(",")
        assert header == ["x", "true_cdf", "edf", "ifs_cdf"]
        with open(tmp_path / "curves_density.csv") as fh:
            header = fh.readline().strip().split(",")
        assert header == ["x", "true_pdf", "kernel", "ifs_pdf"]

    def test_edf_flat_and_ifs_increasing_on_gaps(self):
        from ifsdist.operator import evaluate_cdf, fixed_point_cdf

        n, seed = 400, 2
        values = beta_sample(BetaParams(2, 2), n, RandomStream(seed))
        censored = apply_window_censoring(
            Sample(values=values, support=UNIT_SUPPORT), DEFAULT_CENSOR_WINDOWS
        )
        model = fit_ifs(censored, MapKind.W1)
        cdf = fixed_point_cdf(model)
        eps = 1e-9
        for lo, hi in DEFAULT_CENSOR_WINDOWS.gaps(UNIT_SUPPORT):
            assert edf(censored.values, lo + eps) == edf(censored.values, hi - eps)
            assert evaluate_cdf(model, cdf, hi - eps) > evaluate_cdf(model, cdf, lo + eps)

    def test_too_few_retained_raises(self):
        with pytest.raises(NoDataError):
            run_missing_data_experiment(n=30, seed=1)

    def test_kernel_density_multimodal_on_censored_sample(self):
        from ifsdist.baselines import kernel_density

        values = beta_sample(BetaParams(2, 2), 400, RandomStream(9))
        censored = apply_window_censoring(
            Sample(values=values, support=UNIT_SUPPORT), DEFAULT_CENSOR_WINDOWS
        )
        xs = np.linspace(0.0, 1.0, 513)
        dens = kernel_density(censored.values, xs)
        interior = dens[1:-1]
        peaks = np.sum((interior > dens[:-2]) & (interior > dens[2:]))
        assert peaks >= 2
