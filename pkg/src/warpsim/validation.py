"""Acceptance studies shared by the ``validate`` command and the test suite.

Every suite returns a list of :class:`Check` records. A check marked
``informational`` is reported but never counts toward pass/fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import analysis as an
from .moments import (
    bk_moments_exact,
    cdf_moments_exact,
    l2_risk_limit,
    mzw_frechet_variance,
)
from .montecarlo import StudySpec, mzw_theta_limit_study, run_study
from .rng import RngStream, dirichlet_batch, uniform_order_stats_batch
from .samplers import (
    BkConfig,
    CdfConfig,
    MzwConfig,
    bk_batch,
    default_variances,
    mzw_batch,
    simulate_bk,
    simulate_cdf,
    simulate_cdh,
    simulate_mzw,
    simulate_mzw_original,
)
from .warps import (
    PHI2,
    PHI3,
    Gamma1Warp,
    HFunction,
    fourier_matrix,
    gamma_inner,
    gamma_minus,
    gamma_plus,
    gamma_scale,
    get_target,
    psi,
    psi_inverse,
    trapezoid_mean,
    unit_grid,
)

TARGETS = ("phi1", "phi2", "phi3")


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    value: float = float("nan")
    expected: float = float("nan")
    tolerance: float = float("nan")
    detail: str = ""
    informational: bool = False

    def line(self) -> str:
        tag = "INFO" if self.informational else ("PASS" if self.passed else "FAIL")
        return (f"[{tag}] {self.criterion}: {self.name} value={self.value:.6g} "
                f"expected={self.expected:.6g} tol={self.tolerance:.3g} {self.detail}").rstrip()

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in ("value", "expected", "tolerance"):
            if isinstance(d[k], float) and not math.isfinite(d[k]):
                d[k] = None
        return d


def _within(criterion, name, value, expected, tol, detail="", informational=False) -> Check:
    ok = bool(abs(value - expected) <= tol)
    return Check(criterion, name, ok, float(value), float(expected), float(tol), detail, informational)


def all_passed(checks) -> bool:
    return all(c.passed for c in checks if not c.informational)


# ---------------------------------------------------------------------------
# 1. oracle versus sampler

def suite_moments(seed: int = 1, replicates: int = 200_000, ns=(5, 15, 32), thetas=(1.0, 10.0),
                  ts=(0.2, 0.5, 0.8), p: float = 0.5, threads: int = 1) -> list[Check]:
    checks = []
    grid = np.asarray(ts, dtype=float)
    k = 0
    for alg in ("bk", "cdf"):
        for tg in TARGETS:
            for n in ns:
                for th in thetas:
                    cfg = BkConfig(n, th, tg) if alg == "bk" else CdfConfig(n, th, p, tg)
                    res = run_study(StudySpec(alg, cfg, replicates, grid, seed * 1000 + k), threads=threads,
                                    distances=False)
                    k += 1
                    for i, t in enumerate(grid):
                        if alg == "bk":
                            m, v = bk_moments_exact(t, n, th, tg)
                        else:
                            m, v = cdf_moments_exact(t, n, th, p, tg)
                        tag = f"{alg} {tg} n={n} theta={th:g} t={t:g}"
                        em, ev = res.empirical.mean[i], res.empirical.variance[i]
                        checks.append(_within(1, f"mean {tag}", em, m, 4 * res.mean_se[i],
                                              f"z={(em - m) / res.mean_se[i]:+.2f}"))
                        checks.append(_within(1, f"var {tag}", ev, v, 4 * res.var_se[i],
                                              f"z={(ev - v) / res.var_se[i]:+.2f}"))
    return checks


# ---------------------------------------------------------------------------
# 2. O(1/n) rates of the exact oracles

def suite_rates(ns=(10, 20, 40, 80), theta: float = 1.0, ts=(0.25, 0.5, 0.75), p: float = 0.5,
                growth: float = 1.5) -> list[Check]:
    """``n |error|`` at the two largest sizes stays within ``growth`` times its early maximum."""
    checks = []
    f = PHI3
    for alg in ("bk", "cdf"):
        for t in ts:
            phi = float(f(t))
            lim_v = phi * (1 - phi) / (1 + theta)
            sm, sv = [], []
            for n in ns:
                if alg == "bk":
                    m, v = bk_moments_exact(t, n, theta, f)
                else:
                    m, v = cdf_moments_exact(t, n, theta, p, f)
                sm.append(n * abs(m - phi))
                sv.append(n * abs(v - lim_v))
            half = len(ns) // 2
            for label, s in (("mean", sm), ("var", sv)):
                early, late = max(s[:half]), max(s[half:])
                ok = bool(late <= growth * early)
                checks.append(Check(2, f"{alg} {label} n*|err| t={t:g}", ok, late, early, growth,
                                    "n*|err| over n=" + ",".join(map(str, ns)) + ": "
                                    + ", ".join(f"{x:.4g}" for x in s)))
                if not ok:
                    checks.append(_rate_extension(alg, label, t, theta, p, lim_v))
    return checks


def _rate_extension(alg, label, t, theta, p, lim_v, ns=(40, 64, 96, 128)) -> Check:
    """Diagnostic: do the increments of ``n |error|`` shrink beyond the tested range?"""
    phi = float(PHI3(t))
    s = []
    for n in ns:
        m, v = bk_moments_exact(t, n, theta, PHI3) if alg == "bk" else cdf_moments_exact(t, n, theta, p, PHI3)
        s.append(n * abs((m - phi) if label == "mean" else (v - lim_v)))
    inc = np.diff(s) / np.diff(ns)
    return Check(2, f"{alg} {label} n*|err| t={t:g} beyond n=80", bool(np.all(np.diff(inc) < 0)),
                 s[-1], s[0], 0.0,
                 "per-unit increments " + ", ".join(f"{x:.3g}" for x in inc) + " over n="
                 + ",".join(map(str, ns)), informational=True)


# ---------------------------------------------------------------------------
# 3. L2 risk limit

def suite_l2(seed: int = 3, n: int = 500, replicates: int = 10_000, thetas=(1.0, 10.0), p: float = 0.5,
             rel: float = 0.05, threads: int = 1) -> list[Check]:
    checks = []
    grid = np.array([0.5])
    for k, th in enumerate(thetas):
        lim = l2_risk_limit(th, PHI3)
        vals = {}
        for j, alg in enumerate(("bk", "cdf")):
            cfg = BkConfig(n, th, PHI3) if alg == "bk" else CdfConfig(n, th, p, PHI3)
            res = run_study(StudySpec(alg, cfg, replicates, grid, seed * 100 + 10 * k + j), threads=threads)
            vals[alg] = res.l2_error_mean
            checks.append(_within(3, f"{alg} L2 risk theta={th:g}", res.l2_error_mean, lim, rel * lim,
                                  f"rel={res.l2_error_mean / lim - 1:+.4f} se={res.l2_error_se:.2g}"))
        ratio = vals["bk"] / vals["cdf"]
        checks.append(Check(3, f"BK/CDF L2 ratio theta={th:g}", bool(0.5 <= ratio <= 2.0), ratio, 1.0, 0.0,
                            "must lie in [0.5, 2]"))
    return checks


# ---------------------------------------------------------------------------
# 4. Frechet variance of MZW paths

def gamma_sq_distances(ys: np.ndarray, target) -> np.ndarray:
    """Squared smooth-group norms of ``w (-) phi`` for paths sampled on the uniform grid.

    The log-derivative of each path is taken from its piecewise slopes, as
    :meth:`Gamma1Warp.from_path` does.
    """
    G = ys.shape[1]
    h = 1.0 / (G - 1)
    slopes = np.maximum(np.diff(ys, axis=1) / h, 1e-12)
    logd = np.log(np.concatenate([slopes, slopes[:, -1:]], axis=1))
    base = Gamma1Warp.from_target(get_target(target), G).logd
    diff = logd - base[None, :]
    diff -= trapezoid_mean(diff)[:, None]
    return trapezoid_mean(diff ** 2)


def suite_frechet(seed: int = 4, m: int = 10, replicates: int = 10_000, thetas=(0.0, 1.0),
                  rel: float = 0.05, target="phi3") -> list[Check]:
    checks = []
    v = default_variances(m)
    for k, th in enumerate(thetas):
        expected = mzw_frechet_variance(v, th)
        cfg = MzwConfig(m, th, v=v, target=target)
        s2, d2 = [], []
        stream = RngStream(seed).child(k)
        for b, start in enumerate(range(0, replicates, 2000)):
            # blocks keep the (size, 2048) intermediates small
            _, ys, g = mzw_batch(cfg, min(2000, replicates - start), stream.child(b))
            s2.append(np.sum(g ** 2, axis=1))
            d2.append(gamma_sq_distances(ys, target))
        s2, d2 = np.concatenate(s2), np.concatenate(d2)
        checks.append(_within(4, f"E||X_m - psi(phi)||^2 theta={th:g}", s2.mean(), expected, rel * expected,
                              f"se={s2.std(ddof=1) / np.sqrt(s2.size):.3g}"))
        checks.append(_within(4, f"E gamma_inner(w-phi, w-phi) theta={th:g}", d2.mean(), expected,
                              rel * expected, f"se={d2.std(ddof=1) / np.sqrt(d2.size):.3g}"))
    return checks


def suite_theta_sweep(seed: int = 5, replicates: int = 4000) -> list[Check]:
    """Variance decreases with the concentration for the exact BK oracle and for MZW paths."""
    checks = suite_frechet(seed=seed, replicates=max(replicates, 10_000))
    vals = [bk_moments_exact(0.5, 15, th, PHI3)[1] for th in (0.1, 1.0, 10.0, 100.0)]
    checks.append(Check(4, "bk_var_exact decreasing in theta (t=0.5, n=15)",
                        bool(np.all(np.diff(vals) < 0)), vals[-1], vals[0], 0.0,
                        ", ".join(f"{x:.4g}" for x in vals), informational=True))
    mv = []
    for k, th in enumerate((0.1, 1.0, 50.0)):
        res = run_study(StudySpec("mzw", MzwConfig(15, th, target=PHI3), replicates, np.array([0.5]),
                                  seed * 10 + k), distances=False)
        mv.append(float(res.empirical.variance[0]))
    checks.append(Check(4, "MZW variance decreasing in theta (t=0.5, m=15)",
                        bool(np.all(np.diff(mv) < 0)), mv[-1], mv[0], 0.0,
                        ", ".join(f"{x:.4g}" for x in mv), informational=True))
    return checks


# ---------------------------------------------------------------------------
# 5. large-concentration limit of MZW

def suite_mzw_limit(seed: int = 6, m: int = 10, replicates: int = 10_000, theta: float = 1e4) -> list[Check]:
    rows = mzw_theta_limit_study(m, None, PHI3, [theta], replicates, master_seed=seed)
    r = rows[0]
    return [
        Check(5, f"MZW mean inside exponential envelope theta={theta:g}", r["within_envelope"],
              r["sup_mean_dev"], 0.0, r["upper_dev_bound"],
              f"max se={r['max_mean_se']:.2g}"),
        Check(5, f"MZW sup variance theta={theta:g}", bool(r["sup_variance"] <= 1e-3), r["sup_variance"], 0.0,
              1e-3, "must be <= 1e-3"),
    ]


# ---------------------------------------------------------------------------
# 6. concentration estimator study

ESTIMATOR_CELLS = (
    # theta, n, mean, mean tol, sd, sd tol
    (5.0, 25, 0.696, 0.06, 0.122, 0.04),
    (500.0, 200, 0.296, 0.05, None, None),
    (1800.0, 2000, 0.531, 0.07, None, None),
)


def suite_estimator_cells(seed: int = 7, m: int = 50, B: int = 100, long: bool = False) -> list[Check]:
    checks = []
    cells = list(ESTIMATOR_CELLS)
    if long:
        cells.append((500.0, 40000, 0.99, 0.12, None, None))
    for k, (th, n, mu, mtol, sd, sdtol) in enumerate(cells):
        row = an.theta_study(th, [n], m=m, B=B, master_seed=seed * 100 + k)[0]
        checks.append(_within(6, f"mean theta_hat/theta theta={th:g} n={n}", row["mean_ratio"], mu, mtol))
        if sd is not None:
            checks.append(_within(6, f"sd theta_hat/theta theta={th:g} n={n}", row["sd_ratio"], sd, sdtol))
        if th == 5.0:
            pooled = an.theta_study(th, [n], m=m, B=B, master_seed=seed * 100 + k, numerator="pooled")[0]
            checks.append(_within(6, f"pooled-numerator variant theta={th:g} n={n}", pooled["mean_ratio"], mu,
                                  mtol, "diagnostic only", informational=True))
    return checks


# ---------------------------------------------------------------------------
# 7. structural invariants and Dirichlet identities

def _fuzz_paths(seed: int, calls: int) -> Check:
    rng = RngStream(seed)
    pick = np.random.default_rng(seed)
    algs = ("cdh", "bk", "cdf", "mzw", "mzw_original")
    bad = 0
    t0 = time.time()
    for i in range(calls):
        alg = algs[i % len(algs)]
        n = int(pick.integers(1, 60))
        th = float(10 ** pick.uniform(-3, 3))
        tg = TARGETS[int(pick.integers(0, 3))]
        s = rng.child(i)
        if alg == "cdh":
            w = simulate_cdh(n, np.linspace(0, 1, n + 2), th, s)
        elif alg == "bk":
            w = simulate_bk(BkConfig(n, th, tg), s)
        elif alg == "cdf":
            w = simulate_cdf(CdfConfig(n, th, float(pick.uniform(0.01, 0.99)), tg), s)
        elif alg == "mzw":
            w = simulate_mzw(MzwConfig(n, th, target="phi3" if tg == "phi2" else tg, grid_size=257), s)
        else:
            w = simulate_mzw_original(n, default_variances(n), s, grid_size=257)
        ok = (w.xs[0] == 0 and w.xs[-1] == 1 and w.ys[0] == 0 and w.ys[-1] == 1
              and np.all(np.diff(w.xs) > 0) and np.all(np.diff(w.ys) >= 0))
        bad += not ok
    return Check(7, f"fuzzed sampler calls give valid paths ({calls})", bad == 0, bad, 0, 0,
                 f"{time.time() - t0:.1f}s")


def _gamma_laws(seed: int) -> list[Check]:
    gen = np.random.default_rng(seed)
    grid = unit_grid()
    F = fourier_matrix(6, grid)

    def rand_warp():
        return psi_inverse(gen.normal(0, 0.5, 6) @ F)

    worst = {"assoc": 0.0, "comm": 0.0, "ident": 0.0, "inverse": 0.0, "roundtrip": 0.0, "isometry": 0.0}
    for _ in range(20):
        f, g, h = rand_warp(), rand_warp(), rand_warp()
        worst["assoc"] = max(worst["assoc"], np.max(np.abs(gamma_plus(gamma_plus(f, g), h).values
                                                           - gamma_plus(f, gamma_plus(g, h)).values)))
        worst["comm"] = max(worst["comm"], np.max(np.abs(gamma_plus(f, g).values - gamma_plus(g, f).values)))
        worst["ident"] = max(worst["ident"], np.max(np.abs(gamma_plus(f, Gamma1Warp.identity()).values - f.values)))
        worst["inverse"] = max(worst["inverse"], np.max(np.abs(gamma_plus(f, gamma_scale(-1, f)).values - grid)))
        hv = gen.normal(0, 1, 6) @ F
        hv = hv - trapezoid_mean(hv)
        worst["roundtrip"] = max(worst["roundtrip"], np.max(np.abs(psi(psi_inverse(HFunction(hv))).values - hv)))
        d = psi(f).values - psi(g).values
        worst["isometry"] = max(worst["isometry"], abs(math.sqrt(trapezoid_mean(d ** 2))
                                                        - math.sqrt(gamma_inner(gamma_minus(f, g), gamma_minus(f, g)))))
    tol = {"isometry": 1e-6}
    return [Check(7, f"smooth-group law: {k}", bool(v <= tol.get(k, 1e-7)), v, 0.0, tol.get(k, 1e-7))
            for k, v in worst.items()]


def _mc(criterion, name, samples, expected, k=4.0) -> Check:
    x = np.asarray(samples, dtype=float)
    se = x.std(ddof=1, axis=0) / np.sqrt(x.shape[0])
    mean = x.mean(axis=0)
    expected = np.broadcast_to(np.asarray(expected, dtype=float), mean.shape)
    z = np.where(se > 0, (mean - expected) / np.where(se > 0, se, 1.0), np.where(mean == expected, 0.0, np.inf))
    i = int(np.argmax(np.abs(np.atleast_1d(z))))
    zz = np.atleast_1d(z)
    return Check(criterion, name, bool(np.all(np.abs(zz) <= k)), float(np.atleast_1d(mean)[i]),
                 float(np.atleast_1d(expected)[i]), float(k * np.atleast_1d(se)[i]),
                 f"worst z={zz[i]:+.2f} over {zz.size} component(s)")


def _exact(criterion, name, samples, expected, tol=1e-12) -> Check:
    err = float(np.max(np.abs(np.asarray(samples) - expected)))
    return Check(criterion, name, err <= tol, err, 0.0, tol, "exact identity")


def dirichlet_identity_checks(seed: int = 8, M: int = 100_000, n: int = 5, theta: float = 2.0,
                              p: float = 0.3) -> list[Check]:
    rng = RngStream(seed)
    c = 1.0 / (1.0 + theta)
    C = 7
    checks = []
    beta = dirichlet_batch(np.full(n, theta / n), M, rng.child(0))
    bpad = np.concatenate([np.zeros((M, 1)), beta, np.zeros((M, 1))], axis=1)  # beta_0 .. beta_{n+1}
    btil = np.cumsum(bpad, axis=1)  # tilde beta_0 .. tilde beta_{n+1}
    j = np.arange(1, n + 1)
    checks.append(_mc(C, "esp_beta", beta, 1.0 / n))
    checks.append(_mc(C, "var_beta", (beta - 1.0 / n) ** 2, c / n - c / n ** 2))
    checks.append(_mc(C, "cov_beta", (beta[:, 0] - 1.0 / n) * (beta[:, 1] - 1.0 / n), -c / n ** 2))
    checks.append(_mc(C, "mom_ord_2_beta", beta ** 2, c / n + (1 - c) / n ** 2))
    checks.append(_mc(C, "esp_cross_beta", beta[:, 0] * beta[:, 2], (1 - c) / n ** 2))
    checks.append(_mc(C, "esp_beta_tildebeta", beta * btil[:, 1:n + 1], c / n + j * (1 - c) / n ** 2))
    checks.append(_exact(C, "esp_beta_tildebeta_n+1", bpad[:, n + 1] * btil[:, n + 1], 0.0))
    checks.append(_mc(C, "mom_ord_2_tilde_beta", btil[:, 1:n + 1] ** 2, j * c / n + j ** 2 * (1 - c) / n ** 2))
    checks.append(_exact(C, "mom_ord_2_tilde_beta_n+1", btil[:, n + 1] ** 2, 1.0, 1e-12))
    # gamma_j = (1-p) beta_j + p beta_{j-1}, j = 1..n+1
    gam = (1 - p) * bpad[:, 1:] + p * bpad[:, :-1]
    gtil = np.cumsum(gam, axis=1)
    jj = np.arange(2, n + 1)
    checks.append(_mc(C, "esp_gamma_1", gam[:, 0], (1 - p) / n))
    checks.append(_mc(C, "esp_gamma_j", gam[:, 1:n], 1.0 / n))
    checks.append(_mc(C, "esp_gamma_n+1", gam[:, n], p / n))
    checks.append(_mc(C, "mom_ord_2_gamma_1", gam[:, 0] ** 2, (1 - p) ** 2 * (c / n + (1 - c) / n ** 2)))
    checks.append(_mc(C, "mom_ord_2_gamma_n+1", gam[:, n] ** 2, p ** 2 * (c / n + (1 - c) / n ** 2)))
    checks.append(_mc(C, "mom_ord_2_gamma_j", gam[:, 1:n] ** 2,
                      c / n * (1 - 2 * p + 2 * p * p) + (1 - c) / n ** 2))
    checks.append(_mc(C, "esp_tilde_gamma_1", gtil[:, 0], (1 - p) / n))
    checks.append(_mc(C, "esp_tilde_gamma_j", gtil[:, :n], (j - p) / n))
    checks.append(_exact(C, "esp_tilde_gamma_n+1", gtil[:, n], 1.0, 1e-12))
    checks.append(_mc(C, "mom_ord_2_tilde_gamma_1", gtil[:, 0] ** 2, (1 - p) ** 2 * (c / n + (1 - c) / n ** 2)))
    checks.append(_mc(C, "mom_ord_2_tilde_gamma_j", gtil[:, :n] ** 2,
                      (j - 2 * p + p * p) * c / n + (j - p) ** 2 * (1 - c) / n ** 2))
    checks.append(_exact(C, "mom_ord_2_tilde_gamma_n+1", gtil[:, n] ** 2, 1.0, 1e-12))
    j1 = np.arange(1, n)
    checks.append(_mc(C, "esp_cross_gamma_tilde_gamma", gam[:, 1:n] * gtil[:, :n - 1],
                      c / n * (p - p * p) + (1 - c) / n ** 2 * (j1 - p)))
    checks.append(_mc(C, "esp_cross_gamma_tilde_gamma_n", gam[:, n] * gtil[:, n - 1],
                      p / n - p * p * c / n - p * p * (1 - c) / n ** 2))
    del jj

    # BK weights with a frozen partition
    u = np.array([0.0, 0.1, 0.25, 0.3, 0.55, 0.8, 1.0])
    cfg = BkConfig(u.size - 2, theta, PHI3)
    _, ys = bk_batch(cfg, M, rng.child(1), u_star=u)
    alpha = np.diff(ys, axis=1)  # alpha_1 .. alpha_{n+1}
    atil = ys[:, 1:]  # tilde alpha_1 .. tilde alpha_{n+1}
    f = PHI3(u)
    d = np.diff(f)
    checks.append(_mc(C, "prop_dir1", alpha, d))
    checks.append(_mc(C, "prop_dir2", (alpha - d) ** 2, c * d - c * d * d))
    checks.append(_mc(C, "prop_dir3", (alpha[:, 0] - d[0]) * (alpha[:, 3] - d[3]), -c * d[0] * d[3]))
    checks.append(_mc(C, "esp_tilde_alpha", atil, f[1:]))
    checks.append(_mc(C, "mom_ord_2_alpha", alpha ** 2, c * d + (1 - c) * d * d))
    checks.append(_mc(C, "mom_ord_2_tilde_alpha", atil ** 2, c * f[1:] + (1 - c) * f[1:] ** 2))
    checks.append(_mc(C, "cross_esp", atil[:, :-1] * alpha[:, 1:], (1 - c) * d[1:] * f[1:-1]))
    return checks


def order_stat_identity_checks(seed: int = 9, M: int = 100_000, n: int = 6, t: float = 0.4) -> list[Check]:
    """Bracket-index sums over the uniform order statistics."""
    U = uniform_order_stats_batch(n, M, RngStream(seed))
    s = float(PHI2(t))
    # t in [phi^{-1}(U_j), phi^{-1}(U_{j+1})) iff phi(t) in [U_j, U_{j+1})
    j = np.sum(U[:, 1:-1] <= s, axis=1)  # bracket index 0..n
    inner = (j >= 1) & (j <= n - 1)
    return [
        _mc(7, "esp_indicatrice", inner.astype(float), 1 - s ** n - (1 - s) ** n),
        _mc(7, "jesp", np.where(inner, j, 0.0), n * s - n * s ** n),
        _mc(7, "j2_esp", np.where(inner, j ** 2, 0.0), n * n * s * s - n * s * s - n * n * s ** n + n * s),
    ]


def suite_structural(seed: int = 10, fuzz_calls: int = 10_000) -> list[Check]:
    checks = [_fuzz_paths(seed, fuzz_calls)]
    checks += _gamma_laws(seed + 1)
    checks += dirichlet_identity_checks(seed + 2)
    checks += order_stat_identity_checks(seed + 3)
    return checks


# ---------------------------------------------------------------------------
# 8. synthetic drift pipeline

PIPELINE_SPEC = (
    an.SyntheticPeriod("1970-1977", "1970-01-01T00:00:00", 8 * 8760),
    an.SyntheticPeriod("1980", "1980-01-01T00:00:00", 8760),
    an.SyntheticPeriod("1983", "1983-01-01T00:00:00", 8760),
    an.SyntheticPeriod("1990", "1990-01-01T00:00:00", 8760, shift=1.5),
    an.SyntheticPeriod("1995", "1995-01-01T00:00:00", 8760, shift=2.5),
)
PIPELINE_REFERENCE = "1970-1977"
PIPELINE_DRIFTED = ("1990", "1995")


def run_pipeline(seed: int, m: int = 50, B: int = 100, alpha: float = 0.05, spec=PIPELINE_SPEC,
                 reference: str = PIPELINE_REFERENCE):
    obs = an.synthesize_temperature(spec, RngStream(seed))
    datasets = an.split_periods(obs, an.period_bounds(spec))
    return an.analyze_periods(datasets, reference, m=m, alpha=alpha, B=B, master_seed=seed)


def suite_pipeline(seed: int = 11, m: int = 50, B: int = 100, alpha: float = 0.05) -> list[Check]:
    res = run_pipeline(seed, m, B, alpha)
    checks = []
    for r in res:
        sup = float(np.max(np.abs(r.band.centered)))
        if r.label in PIPELINE_DRIFTED:
            above = r.band.above_zero()
            interior = above[1:-1]
            checks.append(Check(8, f"drifted period {r.label}: band above 0 on an interior stretch",
                                bool(interior.any()), float(interior.mean()), 1.0, 0.0,
                                f"fraction of grid above 0; h={r.band.half_width:.4g}"))
        else:
            checks.append(Check(8, f"null period {r.label}: band contains 0", r.band.contains_zero(), sup,
                                0.0, r.band.half_width, "sup|centered| must not exceed h"))
    again = run_pipeline(seed, m, B, alpha)
    same = all(np.array_equal(a.band.centered, b.band.centered) and a.band.half_width == b.band.half_width
               and a.theta.value == b.theta.value for a, b in zip(res, again))
    checks.append(Check(8, "pipeline bit-identical under a fixed seed", same, float(same), 1.0, 0.0))
    return checks


SUITES = {
    "moments": lambda seed, quick: suite_moments(seed, replicates=20_000 if quick else 200_000),
    "convergence": lambda seed, quick: suite_rates() + suite_l2(seed, replicates=2000 if quick else 10_000),
    "theta-sweep": lambda seed, quick: suite_theta_sweep(seed, replicates=1000 if quick else 4000),
    "mzw-limit": lambda seed, quick: suite_mzw_limit(seed, replicates=2000 if quick else 10_000),
    "table2": lambda seed, quick: suite_estimator_cells(seed, B=30 if quick else 100),
    "structural": lambda seed, quick: suite_structural(seed, fuzz_calls=1000 if quick else 10_000),
    "pipeline": lambda seed, quick: suite_pipeline(seed, B=40 if quick else 100),
}
