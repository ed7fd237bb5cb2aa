"""Random warping-path generators.

Five algorithms produce :class:`~warpsim.warps.WarpPath` objects:

* ``cdh`` -- Dirichlet jumps on a fixed partition.
* ``bk`` -- Dirichlet jumps on a random uniform partition, jump means set by the target.
* ``cdf`` -- polygonal smoothing of a Dirichlet-weighted empirical distribution function.
* ``mzw`` / ``mzw_original`` -- exponentiated truncated Fourier series.

Each algorithm also has a ``*_batch`` form returning knot arrays for many
replicates at once; the scalar form is the batch form with one row, so both
consume the random stream identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameterError, SamplingError
from .rng import RngStream, dirichlet_batch, uniform_order_stats_batch
from .warps import (
    GRID_SIZE,
    Gamma1Warp,
    TargetWarp,
    WarpPath,
    cumulative_exp,
    fourier_matrix,
    get_target,
    psi,
    unit_grid,
)

EXP_LIMIT = 700.0


def default_variances(m: int) -> np.ndarray:
    """Base score variances ``v_i = 1 / i**2``."""
    i = np.arange(1, m + 1, dtype=float)
    return 1.0 / i ** 2


@dataclass(frozen=True)
class BkConfig:
    n: int
    theta: float
    target: TargetWarp = "phi1"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError("n must be a positive integer")
        if not self.theta > 0 or not np.isfinite(self.theta):
            raise InvalidParameterError("theta must be a finite positive real")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "target", get_target(self.target))


@dataclass(frozen=True)
class CdfConfig:
    n: int
    theta: float
    p: float = 0.5
    target: TargetWarp = "phi1"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError("n must be a positive integer")
        if not self.theta > 0 or not np.isfinite(self.theta):
            raise InvalidParameterError("theta must be a finite positive real")
        if not 0.0 < self.p < 1.0:
            raise InvalidParameterError("p must lie in (0, 1)")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "target", get_target(self.target))


@dataclass(frozen=True)
class MzwConfig:
    """Settings for the modified Fourier-score sampler.

    Parameters
    ----------
    m : int
        Truncation order.
    theta : float
        Concentration; scores have variance ``v_i / (1 + theta)``. Zero is allowed.
    v : array_like, optional
        Base variances, default ``1 / i**2``.
    target : TargetWarp or str
        Warp with strictly positive derivative on the grid.
    score_law : {"gaussian", "custom"}
    score_sampler : callable, optional
        ``score_sampler(rng, variances, size) -> array (size, m)``; required
        for ``score_law="custom"``. Scores must have mean zero and the given
        variances.
    grid_size : int
        Number of grid nodes for the discretized path.
    clamp : bool
        Clamp target derivative values below at 1e-12 instead of rejecting them.
    """

    m: int
    theta: float
    v: Optional[np.ndarray] = None
    target: TargetWarp = "phi1"
    score_law: str = "gaussian"
    score_sampler: Optional[Callable] = field(default=None, compare=False)
    grid_size: int = GRID_SIZE
    clamp: bool = False

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InvalidParameterError("m must be a positive integer")
        if not self.theta >= 0 or not np.isfinite(self.theta):
            raise InvalidParameterError("theta must be a finite non-negative real")
        v = default_variances(int(self.m)) if self.v is None else np.asarray(self.v, dtype=float)
        if v.shape != (int(self.m),) or np.any(~(v > 0)) or np.any(~np.isfinite(v)):
            raise InvalidParameterError("v must hold m finite positive reals")
        if self.score_law not in ("gaussian", "custom"):
            raise InvalidParameterError("score_law must be 'gaussian' or 'custom'")
        if self.score_law == "custom" and self.score_sampler is None:
            raise InvalidParameterError("custom score law needs a score_sampler")
        if self.grid_size < 3:
            raise InvalidParameterError("grid_size must be >= 3")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "target", get_target(self.target))

    @property
    def score_variances(self) -> np.ndarray:
        return self.v / (1.0 + self.theta)


@dataclass(frozen=True)
class CdhConfig:
    """Fixed-partition sampler settings; the default partition is uniform."""

    n: int
    theta: float
    t_grid: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError("n must be a positive integer")
        if not self.theta > 0 or not np.isfinite(self.theta):
            raise InvalidParameterError("theta must be a finite positive real")
        g = np.linspace(0.0, 1.0, int(self.n) + 2) if self.t_grid is None else _check_partition(self.t_grid)
        if g.size != int(self.n) + 2:
            raise InvalidParameterError("partition must have n + 2 knots")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "t_grid", g)


# ---------------------------------------------------------------------------
# CDH

def _check_partition(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3 or t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
        raise InvalidParameterError("partition must increase strictly from 0 to 1 with an interior knot")
    return t


def cdh_batch(n: int, t_grid, theta: float, size: int, rng: RngStream):
    """Ordinates of ``size`` CDH paths on a fixed partition; shape ``(size, n + 2)``."""
    t = _check_partition(t_grid)
    if t.size != n + 2:
        raise InvalidParameterError("partition must have n + 2 knots")
    if not theta > 0:
        raise InvalidParameterError("theta must be > 0")
    w = dirichlet_batch(np.full(n + 1, float(theta)), size, rng)
    return t, _cumulate(w)


def simulate_cdh(n: int, t_grid, theta: float, rng: RngStream) -> WarpPath:
    """Path through ``(t_j, cumulative Dirichlet(theta,...,theta) weights)``."""
    t, ys = cdh_batch(n, t_grid, theta, 1, rng)
    return WarpPath(t, ys[0])


def _cumulate(w: np.ndarray) -> np.ndarray:
    ys = np.zeros((w.shape[0], w.shape[1] + 1))
    np.cumsum(w, axis=1, out=ys[:, 1:])
    np.clip(ys, 0.0, 1.0, out=ys)
    ys[:, -1] = 1.0
    return ys


# ---------------------------------------------------------------------------
# BK

def bk_batch(cfg: BkConfig, size: int, rng: RngStream, u_star=None):
    """Knots of ``size`` BK paths.

    Parameters
    ----------
    u_star : array_like, optional
        Frozen partition (length ``n + 2``) used for every row instead of
        drawing order statistics.

    Returns
    -------
    xs, ys : ndarray
        Arrays of shape ``(size, n + 2)``.
    """
    n = cfg.n
    if u_star is None:
        xs = uniform_order_stats_batch(n, size, rng)
    else:
        u = _check_partition(u_star)
        if u.size != n + 2:
            raise InvalidParameterError("frozen partition must have n + 2 knots")
        xs = np.broadcast_to(u, (size, n + 2)).copy()
    phi = cfg.target.eval(xs)
    phi[:, 0], phi[:, -1] = 0.0, 1.0
    params = cfg.theta * np.maximum(np.diff(phi, axis=1), 0.0)
    alpha = dirichlet_batch(params, size, rng)
    return xs, _cumulate(alpha)


def simulate_bk(cfg: BkConfig, rng: RngStream, u_star=None) -> WarpPath:
    xs, ys = bk_batch(cfg, 1, rng, u_star=u_star)
    return WarpPath(xs[0], ys[0])


# ---------------------------------------------------------------------------
# CDF

def cdf_ordinates(beta: np.ndarray, p: float) -> np.ndarray:
    """Cumulative ordinates ``(1 - p) S_j + p S_{j-1}`` padded with 0 and 1.

    ``beta`` has shape ``(size, n)``; the result has shape ``(size, n + 2)``.
    """
    size, n = beta.shape
    S = np.zeros((size, n + 1))
    np.cumsum(beta, axis=1, out=S[:, 1:])
    S[:, -1] = 1.0
    ys = np.empty((size, n + 2))
    ys[:, 0] = 0.0
    ys[:, 1:-1] = (1.0 - p) * S[:, 1:] + p * S[:, :-1]
    ys[:, -1] = 1.0
    np.clip(ys, 0.0, 1.0, out=ys)
    return ys


def cdf_batch(cfg: CdfConfig, size: int, rng: RngStream, u_star=None, beta=None):
    """Knots of ``size`` CDF paths; arrays of shape ``(size, n + 2)``.

    The order statistics are drawn before the Dirichlet weights, and the
    weights do not depend on the target, so two targets with the same stream
    give bit-identical ordinates.
    """
    n = cfg.n
    if u_star is None:
        u = uniform_order_stats_batch(n, size, rng)
    else:
        u = _check_partition(u_star)
        if u.size != n + 2:
            raise InvalidParameterError("frozen partition must have n + 2 knots")
        u = np.broadcast_to(u, (size, n + 2)).copy()
    if beta is None:
        beta = dirichlet_batch(np.full(n, cfg.theta / n), size, rng)
    xs = cfg.target.inverse(u)
    xs[:, 0], xs[:, -1] = 0.0, 1.0
    # a steep target can map distinct uniforms to one abscissa; redraw those rows
    bad = np.flatnonzero(np.any(np.diff(xs, axis=1) <= 0, axis=1))
    tries = 0
    while bad.size:
        if u_star is not None or tries >= 64:
            raise SamplingError("target inverse collapsed distinct knots; the target is too steep")
        u[bad] = uniform_order_stats_batch(n, bad.size, rng)
        xs[bad] = cfg.target.inverse(u[bad])
        xs[bad, 0], xs[bad, -1] = 0.0, 1.0
        bad = bad[np.any(np.diff(xs[bad], axis=1) <= 0, axis=1)]
        tries += 1
    return xs, cdf_ordinates(beta, cfg.p)


def simulate_cdf(cfg: CdfConfig, rng: RngStream, u_star=None) -> WarpPath:
    xs, ys = cdf_batch(cfg, 1, rng, u_star=u_star)
    return WarpPath(xs[0], ys[0])


# ---------------------------------------------------------------------------
# MZW

def _draw_scores(cfg: MzwConfig, size: int, rng: RngStream, scores):
    var = cfg.score_variances
    if scores is not None:
        g = np.asarray(scores, dtype=float)
        if g.shape == (cfg.m,):
            g = np.broadcast_to(g, (size, cfg.m))
        if g.shape != (size, cfg.m):
            raise InvalidParameterError("injected scores must have shape (m,) or (size, m)")
        return np.array(g)
    if cfg.score_law == "gaussian":
        return rng.standard_normal((size, cfg.m)) * np.sqrt(var)
    g = np.asarray(cfg.score_sampler(rng, var, size), dtype=float)
    if g.shape != (size, cfg.m):
        raise SamplingError("custom score sampler returned the wrong shape")
    return g


def _mzw_from_field(base: np.ndarray, scores: np.ndarray, basis: np.ndarray) -> np.ndarray:
    X = base[None, :] + scores @ basis
    if np.any(~np.isfinite(X)) or np.max(np.abs(X)) > EXP_LIMIT:
        raise SamplingError(
            "log-derivative field exceeds 700 in magnitude; use smaller variances or a larger theta"
        )
    return cumulative_exp(X)


def mzw_batch(cfg: MzwConfig, size: int, rng: RngStream, scores=None):
    """Grid and ordinates of ``size`` modified MZW paths.

    Returns
    -------
    grid : ndarray, shape (grid_size,)
    ys : ndarray, shape (size, grid_size)
    scores : ndarray, shape (size, m)
    """
    grid = unit_grid(cfg.grid_size)
    base = psi(Gamma1Warp.from_target(cfg.target, cfg.grid_size, clamp=cfg.clamp)).values
    g = _draw_scores(cfg, size, rng, scores)
    ys = _mzw_from_field(base, g, fourier_matrix(cfg.m, grid))
    return grid, ys, g


def simulate_mzw(cfg: MzwConfig, rng: RngStream, scores=None) -> WarpPath:
    """One modified MZW path; ``scores`` injects the Fourier coefficients."""
    grid, ys, _ = mzw_batch(cfg, 1, rng, scores=scores)
    return WarpPath(grid, ys[0])


def mzw_original_batch(m: int, v, size: int, rng: RngStream, scores=None, grid_size: int = GRID_SIZE):
    """Original MZW paths: scores have variance ``v_i`` and the base is the identity."""
    cfg = MzwConfig(m=m, theta=0.0, v=v, target="phi1", grid_size=grid_size)
    return mzw_batch(cfg, size, rng, scores=scores)


def simulate_mzw_original(m: int, v, rng: RngStream, scores=None, grid_size: int = GRID_SIZE) -> WarpPath:
    grid, ys, _ = mzw_original_batch(m, v, 1, rng, scores=scores, grid_size=grid_size)
    return WarpPath(grid, ys[0])
