import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from warpsim.errors import InvalidParameterError, SamplingError
from warpsim.rng import RngStream
from warpsim.samplers import (
    BkConfig,
    CdfConfig,
    CdhConfig,
    MzwConfig,
    bk_batch,
    cdf_batch,
    cdf_ordinates,
    cdh_batch,
    default_variances,
    mzw_batch,
    mzw_original_batch,
    simulate_bk,
    simulate_cdf,
    simulate_cdh,
    simulate_mzw,
    simulate_mzw_original,
)
from warpsim.warps import PHI3, fourier_matrix, psi


def valid(w):
    return (w.xs[0] == 0 and w.xs[-1] == 1 and w.ys[0] == 0 and w.ys[-1] == 1
            and np.all(np.diff(w.xs) > 0) and np.all(np.diff(w.ys) >= 0))


class TestConfigs:
    @pytest.mark.parametrize("kw", [dict(n=0, theta=1.0), dict(n=3, theta=0.0), dict(n=3, theta=np.inf),
                                    dict(n=2.5, theta=1.0)])
    def test_bk_rejects(self, kw):
        with pytest.raises(InvalidParameterError):
            BkConfig(**kw)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_cdf_rejects_p(self, p):
        with pytest.raises(InvalidParameterError):
            CdfConfig(5, 1.0, p)

    def test_mzw_checks(self):
        MzwConfig(3, 0.0)
        with pytest.raises(InvalidParameterError):
            MzwConfig(3, -1.0)
        with pytest.raises(InvalidParameterError):
            MzwConfig(3, 1.0, v=[1.0, 2.0])
        with pytest.raises(InvalidParameterError):
            MzwConfig(3, 1.0, score_law="custom")
        assert np.allclose(MzwConfig(3, 1.0).score_variances, [0.5, 0.125, 1 / 18])

    def test_cdh_partition(self):
        assert np.allclose(CdhConfig(3, 1.0).t_grid, [0, 0.25, 0.5, 0.75, 1])
        with pytest.raises(InvalidParameterError):
            CdhConfig(3, 1.0, t_grid=[0, 0.5, 1])


@given(alg=st.sampled_from(["bk", "cdf", "cdh"]), n=st.integers(1, 40),
       theta=st.floats(1e-3, 1e3), p=st.floats(0.01, 0.99),
       target=st.sampled_from(["phi1", "phi2", "phi3"]), seed=st.integers(0, 2**31))
@settings(max_examples=150, deadline=None)
def test_paths_are_valid(alg, n, theta, p, target, seed):
    rng = RngStream(seed)
    if alg == "bk":
        w = simulate_bk(BkConfig(n, theta, target), rng)
    elif alg == "cdf":
        w = simulate_cdf(CdfConfig(n, theta, p, target), rng)
    else:
        w = simulate_cdh(n, np.linspace(0, 1, n + 2), theta, rng)
    assert valid(w)
    assert w.xs.size == n + 2


@given(m=st.integers(1, 30), theta=st.floats(0, 1e3), seed=st.integers(0, 2**31))
@settings(max_examples=50, deadline=None)
def test_mzw_paths_are_valid(m, theta, seed):
    w = simulate_mzw(MzwConfig(m, theta, target="phi3", grid_size=129), RngStream(seed))
    assert valid(w)


def test_same_stream_same_path():
    cfg = CdfConfig(7, 3.0, 0.3, "phi2")
    a, b = simulate_cdf(cfg, RngStream(4)), simulate_cdf(cfg, RngStream(4))
    assert np.array_equal(a.xs, b.xs) and np.array_equal(a.ys, b.ys)


def test_cdf_ordinates_independent_of_target():
    _, y1 = cdf_batch(CdfConfig(6, 2.0, 0.5, "phi1"), 10, RngStream(3))
    _, y3 = cdf_batch(CdfConfig(6, 2.0, 0.5, "phi3"), 10, RngStream(3))
    assert np.array_equal(y1, y3)


def test_cdf_ordinates_formula():
    beta = np.array([[0.2, 0.3, 0.5]])
    ys = cdf_ordinates(beta, 0.25)
    S = np.array([0, 0.2, 0.5, 1.0])
    assert np.allclose(ys[0, 1:-1], 0.75 * S[1:] + 0.25 * S[:-1])
    assert ys[0, 0] == 0 and ys[0, -1] == 1


def test_cdf_abscissae_are_target_quantiles():
    u = np.array([0, 0.1, 0.4, 0.9, 1])
    xs, _ = cdf_batch(CdfConfig(3, 1.0, 0.5, PHI3), 2, RngStream(0), u_star=u)
    assert np.allclose(xs[0], PHI3.inverse(u))


def test_bk_frozen_partition_weight_law():
    u = np.array([0.0, 0.3, 0.7, 1.0])
    _, ys = bk_batch(BkConfig(2, 4.0, "phi1"), 50_000, RngStream(2), u_star=u)
    # the first weight is Beta(theta * 0.3, theta * 0.7)
    assert stats.kstest(ys[:, 1], stats.beta(1.2, 2.8).cdf).pvalue > 1e-3


def test_bk_rejects_bad_frozen_partition():
    with pytest.raises(InvalidParameterError):
        bk_batch(BkConfig(2, 1.0), 1, RngStream(0), u_star=[0, 0.5, 1])


def test_cdh_weights_are_dirichlet():
    t, ys = cdh_batch(2, [0, 0.4, 0.6, 1], 2.0, 40_000, RngStream(1))
    assert stats.kstest(ys[:, 1], stats.beta(2, 4).cdf).pvalue > 1e-3


def test_mzw_injected_scores():
    cfg = MzwConfig(3, 1.0, target="phi3")
    g = np.array([0.3, -0.2, 0.1])
    grid, ys, scores = mzw_batch(cfg, 1, RngStream(0), scores=g)
    h = psi(PHI3).values + g @ fourier_matrix(3, grid)
    from warpsim.warps import cumulative_exp

    assert np.allclose(ys[0], cumulative_exp(h))
    assert np.array_equal(scores[0], g)
    with pytest.raises(InvalidParameterError):
        mzw_batch(cfg, 1, RngStream(0), scores=np.zeros(2))


def test_mzw_zero_scores_give_target():
    grid, ys, _ = mzw_batch(MzwConfig(4, 1.0, target="phi3"), 1, RngStream(0), scores=np.zeros(4))
    assert np.max(np.abs(ys[0] - PHI3(grid))) < 1e-13


def test_mzw_score_variances():
    _, _, g = mzw_batch(MzwConfig(4, 3.0, grid_size=17), 40_000, RngStream(5))
    assert np.allclose(g.var(axis=0), default_variances(4) / 4.0, rtol=0.04)


def test_mzw_custom_scores():
    def uniform_scores(rng, var, size):
        return (rng.random((size, var.size)) - 0.5) * np.sqrt(12 * var)

    cfg = MzwConfig(5, 1.0, score_law="custom", score_sampler=uniform_scores, grid_size=17)
    _, _, g = mzw_batch(cfg, 30_000, RngStream(2))
    assert np.allclose(g.var(axis=0), cfg.score_variances, rtol=0.05)

    bad = MzwConfig(5, 1.0, score_law="custom", score_sampler=lambda r, v, s: np.zeros((s, 2)))
    with pytest.raises(SamplingError):
        mzw_batch(bad, 3, RngStream(0))


def test_mzw_overflow_is_reported():
    with pytest.raises(SamplingError):
        simulate_mzw(MzwConfig(1, 0.0), RngStream(0), scores=np.array([1e4]))


def test_mzw_original_is_identity_based():
    grid, ys, g = mzw_original_batch(3, default_variances(3), 1, RngStream(0), scores=np.zeros(3))
    assert np.allclose(ys[0], grid)
    w = simulate_mzw_original(6, default_variances(6), RngStream(1), grid_size=65)
    assert valid(w)


def test_steep_target_with_frozen_partition_fails_cleanly():
    from warpsim.warps import PiecewiseLinearTarget

    f = PiecewiseLinearTarget([0.0, 0.5, np.nextafter(0.5, 1.0), 1.0], [0.0, 0.1, 0.9, 1.0])
    with pytest.raises(SamplingError):
        cdf_batch(CdfConfig(2, 1.0, 0.5, f), 1, RngStream(0), u_star=[0, 0.2, 0.3, 1])
