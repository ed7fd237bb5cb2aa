import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from warpsim import analysis as an
from warpsim.errors import (
    DegenerateEstimateError,
    DegenerateWarpError,
    IngestionError,
    InsufficientSampleError,
    InvalidParameterError,
)
from warpsim.rng import RngStream
from warpsim.samplers import CdfConfig, cdf_batch
from warpsim.warps import eval_paths


class TestQuantiles:
    def test_empirical_knots(self):
        q = an.empirical_quantile([3.0, 1.0, 2.0])
        assert np.allclose(q.probs, [0, 0.25, 0.5, 0.75, 1])
        assert np.allclose(q.values, [1, 1, 2, 3, 3])
        assert q(0.375) == pytest.approx(1.5)

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            an.empirical_quantile([])
        with pytest.raises(InvalidParameterError):
            an.empirical_quantile([1.0, np.nan])
        with pytest.raises(InvalidParameterError):
            an.QuantileFunction(np.array([0, 0.5, 1.0]), np.array([1.0, 0.0, 2.0]))

    def test_cdf_bounds_on_flat(self):
        q = an.QuantileFunction(np.array([0, 0.2, 0.6, 1.0]), np.array([0.0, 1.0, 1.0, 2.0]))
        lo, hi = q.cdf_bounds(np.array([0.5, 1.0, 1.5]))
        assert np.allclose(lo, [0.1, 0.2, 0.8])
        assert np.allclose(hi, [0.1, 0.6, 0.8])

    @given(data=st.lists(st.integers(-5, 5), min_size=2, max_size=40), )
    @settings(max_examples=60, deadline=None)
    def test_self_warp_is_identity(self, data):
        if len(set(data)) < 2:
            return
        q = an.empirical_quantile(np.array(data, dtype=float))
        grid = an.analysis_grid(201)
        w = an.warp_from_quantiles(q, q, grid)
        assert np.allclose(w.ys, grid, atol=1e-12)

    def test_shift_warp_matches_theory(self):
        gen = np.random.default_rng(0)
        ref = an.empirical_quantile(gen.normal(0, 1, 200_000))
        smp = an.empirical_quantile(gen.normal(0.5, 1, 200_000))
        grid = np.linspace(0.05, 0.95, 19)
        full = an.analysis_grid()
        w = an.warp_from_quantiles(ref, smp, full)
        theory = stats.norm.cdf(stats.norm.ppf(grid) + 0.5)
        assert np.allclose(w(grid), theory, atol=0.01)

    def test_disjoint_sample_is_degenerate(self):
        ref = an.empirical_quantile([0.0, 1.0, 2.0])
        with pytest.raises(DegenerateWarpError):
            an.warp_from_quantiles(ref, an.empirical_quantile([10.0, 11.0]))


class TestEstimators:
    def _warps(self, theta, n, m, seed):
        grid = an.analysis_grid()
        xs, ys = cdf_batch(CdfConfig(n, theta, 0.5, "phi1"), m, RngStream(seed))
        return eval_paths(xs, ys, grid), grid

    def test_phi_hat_near_identity(self):
        W, grid = self._warps(5.0, 400, 200, 1)
        assert np.max(np.abs(an.estimate_phi(W, grid) - grid)) < 0.05

    def test_theta_large_n_is_close(self):
        W, grid = self._warps(5.0, 4000, 400, 2)
        assert an.estimate_theta(W, grid=grid) == pytest.approx(5.0, rel=0.2)

    def test_pooled_identity(self):
        W, grid = self._warps(5.0, 25, 50, 3)
        a = an.estimate_theta_details(W, grid=grid)
        b = an.estimate_theta_details(W, grid=grid, numerator="pooled")
        assert b.value == pytest.approx(a.value - 49 / 50, abs=1e-10)

    def test_degenerate_and_small_inputs(self):
        grid = an.analysis_grid(11)
        W = np.tile(grid, (3, 1))
        with pytest.raises(DegenerateEstimateError):
            an.estimate_theta(W, grid=grid)
        with pytest.raises(InsufficientSampleError):
            an.estimate_phi(W[:1], grid)
        with pytest.raises(InvalidParameterError):
            an.estimate_theta(W + np.eye(3, 11) * 0.01, grid=grid, numerator="x")

    def test_negative_estimate_warns(self):
        grid = an.analysis_grid(101)
        # two warps far apart on both sides of the identity
        W = np.vstack([grid ** 30, grid ** (1 / 30)])
        with pytest.warns(an.NegativeThetaWarning):
            est = an.estimate_theta_details(W, grid=grid)
        assert est.negative and est.value < 0

    def test_theta_study_rows(self):
        rows = an.theta_study(500.0, [25], m=20, B=5, master_seed=1)
        assert rows[0]["n"] == 25 and rows[0]["ratios"].shape == (5,)
        assert 0 < rows[0]["mean_ratio"] < 0.2


class TestBands:
    def test_sup_quantile(self):
        vals = np.arange(1, 101, dtype=float)
        assert an.sup_quantile(vals, 0.05) == 95.0
        assert an.sup_quantile(vals[:20], 0.05) == 19.0

    def test_band_properties(self):
        grid = an.analysis_grid(201)
        ph = grid.copy()
        band = an.bootstrap_bands(ph, 50.0, 0.5, 30, 20, 40, 0.1, grid, master_seed=2)
        assert band.half_width > 0 and band.replicates_used == 40
        assert band.contains_zero()
        assert np.allclose(band.upper - band.lower, 2 * band.half_width)
        header = band.to_csv().splitlines()[0]
        assert header == "prob,phi_hat,centered,lower,upper"
        again = an.bootstrap_bands(ph, 50.0, 0.5, 30, 20, 40, 0.1, grid, master_seed=2)
        assert again.half_width == band.half_width

    def test_negative_theta_is_clamped(self):
        grid = an.analysis_grid(101)
        band = an.bootstrap_bands(grid, -0.5, 0.5, 10, 5, 20, 0.1, grid)
        assert band.theta_clamped and band.metadata()["theta_clamped"]

    def test_band_width_shrinks_with_concentration(self):
        grid = an.analysis_grid(201)
        wide = an.bootstrap_bands(grid, 1.0, 0.5, 30, 20, 40, 0.1, grid, 3).half_width
        narrow = an.bootstrap_bands(grid, 1000.0, 0.5, 30, 20, 40, 0.1, grid, 3).half_width
        assert narrow < wide

    @pytest.mark.parametrize("kw", [dict(alpha=0.0), dict(alpha=1.0), dict(B=10)])
    def test_band_validation(self, kw):
        args = dict(phi_hat=an.analysis_grid(11), theta_hat=1.0, p=0.5, n_i=5, m=5, B=20, alpha=0.1,
                    grid=an.analysis_grid(11))
        args.update(kw)
        with pytest.raises(InvalidParameterError):
            an.bootstrap_bands(**args)


class TestData:
    def test_load_skips_bad_rows(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("timestamp,value\n2000-01-01T00:00:00,1.5\n2000-01-01T01:00:00,\n"
                     "2000-01-01T02:00:00,abc\nnot-a-date,2\n2000-01-01T03:00:00,2.5\n")
        with pytest.warns(UserWarning, match="skipped 3"):
            obs = an.load_observations_csv(p)
        assert len(obs) == 2 and obs.skipped == 3

    def test_load_errors(self, tmp_path):
        with pytest.raises(IngestionError):
            an.load_observations_csv(tmp_path / "missing.csv")
        p = tmp_path / "h.csv"
        p.write_text("time,temp\n2000-01-01,1\n")
        with pytest.raises(IngestionError):
            an.load_observations_csv(p)
        p.write_text("timestamp,value\n2000-01-01,x\n")
        with pytest.raises(IngestionError), warnings.catch_warnings():
            warnings.simplefilter("ignore")
            an.load_observations_csv(p)

    def test_round_trip(self, tmp_path):
        spec = [an.SyntheticPeriod("a", "2001-01-01T00:00:00", 48)]
        obs = an.synthesize_temperature(spec, RngStream(1))
        an.write_observations_csv(obs, tmp_path / "o.csv")
        back = an.load_observations_csv(tmp_path / "o.csv")
        assert np.array_equal(back.values, obs.values)
        assert np.array_equal(back.timestamps, obs.timestamps)

    def test_split_periods(self):
        spec = [an.SyntheticPeriod("a", "2001-01-01T00:00:00", 24), an.SyntheticPeriod("b", "2001-01-02T00:00:00", 24)]
        obs = an.synthesize_temperature(spec, RngStream(2))
        ds = an.split_periods(obs, an.period_bounds(spec))
        assert [d.count for d in ds] == [24, 24]
        ds2 = an.split_periods(obs, ["2001-01-01T00:00:00", "2001-01-01T12:00:00", "2001-01-03T00:00:00"])
        assert [d.count for d in ds2] == [12, 36]
        with pytest.raises(InvalidParameterError):
            an.split_periods(obs, [("x", "2001-01-02", "2001-01-01")])

    def test_random_split_sizes(self):
        d = an.PeriodDataset("a", np.arange(103.0))
        parts = an.random_split(d, 10, RngStream(0))
        sizes = sorted(p.count for p in parts)
        assert sizes[0] == 10 and sizes[-1] == 11 and sum(sizes) == 103
        assert np.array_equal(np.sort(np.concatenate([p.observations for p in parts])), d.observations)
        with pytest.raises(InvalidParameterError):
            an.random_split(d, 200, RngStream(0))


class TestPipeline:
    def _data(self):
        spec = [an.SyntheticPeriod("ref", "1992-01-01T00:00:00", 6 * 8760),
                an.SyntheticPeriod("null", "2001-01-01T00:00:00", 8760),
                an.SyntheticPeriod("warm", "2002-01-01T00:00:00", 8760, shift=1.5)]
        obs = an.synthesize_temperature(spec, RngStream(5))
        return an.split_periods(obs, an.period_bounds(spec))

    def test_detects_shift(self):
        res = an.analyze_periods(self._data(), "ref", m=20, B=40, master_seed=4)
        by = {r.label: r for r in res}
        assert by["null"].band.contains_zero()
        assert by["warm"].band.above_zero()[1:-1].mean() > 0.5
        assert by["warm"].n_i == 438
        report = an.analysis_report(res)
        assert '"label": "warm"' in report

    def test_errors(self):
        with pytest.raises(InvalidParameterError, match="reference"):
            an.analyze_periods(self._data(), "nope", m=20, B=20)
        with pytest.raises(InvalidParameterError, match="null"):
            an.analyze_periods(self._data(), "ref", m=9000, B=20)
