"""Monte Carlo replication harness.

Replicates are generated in fixed-size blocks. Block ``b`` draws from the
child stream ``RngStream(master_seed).child(b)``, so replicate ``i`` is fully
determined by ``(master_seed, i // block_size)`` and its position in the block.
Block summaries are merged in block order, which makes every result
bit-identical whatever the number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidParameterError, WarpError
from .moments import MAX_EXACT_N, MomentProfile, asymptotic_profile, exact_profile
from .rng import RngStream
from .samplers import (
    BkConfig,
    CdfConfig,
    CdhConfig,
    MzwConfig,
    bk_batch,
    cdf_batch,
    cdh_batch,
    default_variances,
    mzw_batch,
    mzw_original_batch,
)
from .warps import WarpPath, eval_paths, get_target

ALGORITHMS = ("cdh", "bk", "cdf", "mzw", "mzw_original")
DEFAULT_BLOCK = 4096
L2_GRID_SIZE = 2001


def default_grid() -> np.ndarray:
    """99 equispaced interior points 0.01 .. 0.99."""
    return np.round(np.arange(1, 100) / 100.0, 12)


@dataclass(frozen=True)
class StudySpec:
    algorithm: str
    config: object
    replicates: int
    grid: np.ndarray = field(default_factory=default_grid)
    master_seed: int = 0
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidParameterError(f"algorithm must be one of {ALGORITHMS}")
        if int(self.replicates) != self.replicates or self.replicates < 2:
            raise InvalidParameterError("replicates must be an integer >= 2")
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or g.size == 0 or np.any(np.diff(g) < 0) or g[0] < 0 or g[-1] > 1:
            raise InvalidParameterError("grid must be a sorted subset of [0, 1]")
        if self.block_size < 1:
            raise InvalidParameterError("block_size must be >= 1")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "replicates", int(self.replicates))


@dataclass(frozen=True)
class StudyResult:
    """Pointwise moments and distance summaries of a replicate study.

    ``variance`` entries are unbiased (divisor ``replicates - 1``).
    ``mean_se`` and ``var_se`` are Monte Carlo standard errors per grid point.
    ``block_seeds`` lists the ``(seed, stream_id, path)`` of each block stream.
    """

    empirical: MomentProfile
    mean_se: np.ndarray
    var_se: np.ndarray
    l2_error_mean: float
    l2_error_se: float
    sup_error_mean: float
    replicates: int
    block_size: int
    block_seeds: list
    l2_errors: Optional[np.ndarray] = None

    @property
    def per_replicate_seeds(self) -> list:
        """Block stream key of every replicate."""
        return [self.block_seeds[i // self.block_size] for i in range(self.replicates)]

    def summary(self) -> dict:
        return {
            "replicates": self.replicates,
            "l2_error_mean": self.l2_error_mean,
            "l2_error_se": self.l2_error_se,
            "sup_error_mean": self.sup_error_mean,
            "block_size": self.block_size,
            "block_seeds": [list(map(int, (s[0], s[1]))) + list(s[2]) for s in self.block_seeds],
        }

    def to_csv(self, path=None) -> str:
        return self.empirical.to_csv(path, extra={"mean_se": self.mean_se, "var_se": self.var_se})


# ---------------------------------------------------------------------------
# path generation

def _target_of(algorithm, cfg):
    if algorithm in ("bk", "cdf", "mzw"):
        return cfg.target
    return get_target("phi1")


def generate_block(algorithm: str, cfg, size: int, rng: RngStream):
    """Knots of ``size`` paths: ``(xs, ys)`` with ``xs`` shared (1-d) or per row (2-d)."""
    if algorithm == "bk":
        return bk_batch(cfg, size, rng)
    if algorithm == "cdf":
        return cdf_batch(cfg, size, rng)
    if algorithm == "cdh":
        return cdh_batch(cfg.n, cfg.t_grid, cfg.theta, size, rng)
    if algorithm == "mzw":
        grid, ys, _ = mzw_batch(cfg, size, rng)
        return grid, ys
    if algorithm == "mzw_original":
        grid, ys, _ = mzw_original_batch(cfg.m, cfg.v, size, rng, grid_size=cfg.grid_size)
        return grid, ys
    raise InvalidParameterError(f"unknown algorithm {algorithm!r}")


def path_distances(xs, ys, target, n_grid: int = L2_GRID_SIZE):
    """Squared L2 and sup distances of each path to ``target``.

    The integral of ``(w - phi)**2`` uses Simpson's rule on every cell of the
    union of the path knots and a uniform grid, so ``w`` is linear on each
    cell and only the smooth target contributes quadrature error.
    """
    target = get_target(target)
    ys = np.asarray(ys, dtype=float)
    xs = np.asarray(xs, dtype=float)
    base = np.linspace(0.0, 1.0, n_grid)
    if xs.ndim == 1:
        nodes = np.union1d(xs, base)
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        h = np.diff(nodes)
        wn = eval_paths(xs, ys, nodes) - target.eval(nodes)[None, :]
        wm = eval_paths(xs, ys, mids) - target.eval(mids)[None, :]
        l2 = np.sum(h / 6.0 * (wn[:, :-1] ** 2 + 4.0 * wm ** 2 + wn[:, 1:] ** 2), axis=1)
        return l2, np.max(np.abs(wn), axis=1)
    M = ys.shape[0]
    l2 = np.empty(M)
    sup = np.empty(M)
    for i in range(M):
        nodes = np.union1d(xs[i], base)
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        h = np.diff(nodes)
        wn = np.interp(nodes, xs[i], ys[i]) - target.eval(nodes)
        wm = np.interp(mids, xs[i], ys[i]) - target.eval(mids)
        l2[i] = np.sum(h / 6.0 * (wn[:-1] ** 2 + 4.0 * wm ** 2 + wn[1:] ** 2))
        sup[i] = np.max(np.abs(wn))
    return l2, sup


# ---------------------------------------------------------------------------
# streaming moments

@dataclass
class _Acc:
    """Count, mean and centred power sums (orders 2..4) merged in a fixed order."""

    n: int = 0
    mean: Optional[np.ndarray] = None
    m2: Optional[np.ndarray] = None
    m3: Optional[np.ndarray] = None
    m4: Optional[np.ndarray] = None

    @classmethod
    def of(cls, x: np.ndarray) -> "_Acc":
        mu = np.mean(x, axis=0)
        d = x - mu
        d2 = d * d
        return cls(x.shape[0], mu, d2.sum(axis=0), (d2 * d).sum(axis=0), (d2 * d2).sum(axis=0))

    def merge(self, o: "_Acc") -> "_Acc":
        if self.n == 0:
            return o
        n = self.n + o.n
        delta = o.mean - self.mean
        na, nb = self.n, o.n
        mean = self.mean + delta * nb / n
        m2 = self.m2 + o.m2 + delta ** 2 * na * nb / n
        m3 = (self.m3 + o.m3 + delta ** 3 * na * nb * (na - nb) / n ** 2
              + 3.0 * delta * (na * o.m2 - nb * self.m2) / n)
        m4 = (self.m4 + o.m4 + delta ** 4 * na * nb * (na * na - na * nb + nb * nb) / n ** 3
              + 6.0 * delta ** 2 * (na * na * o.m2 + nb * nb * self.m2) / n ** 2
              + 4.0 * delta * (na * o.m3 - nb * self.m3) / n)
        return _Acc(n, mean, m2, m3, m4)

    def moments(self):
        n = self.n
        var = self.m2 / (n - 1)
        mean_se = np.sqrt(var / n)
        # standard error of the sample variance from the fourth central moment
        mu4 = self.m4 / n
        s2 = self.m2 / n
        var_se = np.sqrt(np.maximum(mu4 - s2 * s2, 0.0) / n)
        return self.mean, var, mean_se, var_se


@dataclass
class _Block:
    acc: _Acc
    l2: np.ndarray
    sup: np.ndarray


def _run_block(spec: StudySpec, b: int, size: int, target, want_dist: bool) -> _Block:
    rng = RngStream(spec.master_seed).child(b)
    try:
        xs, ys = generate_block(spec.algorithm, spec.config, size, rng)
    except WarpError as exc:
        first = b * spec.block_size
        raise type(exc)(f"replicates {first}..{first + size - 1}: {exc}") from exc
    vals = eval_paths(xs, ys, spec.grid)
    if want_dist:
        l2, sup = path_distances(xs, ys, target)
    else:
        l2 = sup = np.full(size, np.nan)
    return _Block(_Acc.of(vals), l2, sup)


def _summarize(blocks: Sequence[_Block], spec_grid, params, block_size, seeds) -> StudyResult:
    acc = _Acc()
    for blk in blocks:
        acc = acc.merge(blk.acc)
    mean, var, mse, vse = acc.moments()
    l2 = np.concatenate([b.l2 for b in blocks])
    sup = np.concatenate([b.sup for b in blocks])
    prof = MomentProfile(spec_grid, np.clip(mean, 0.0, 1.0), var, "empirical", params)
    return StudyResult(
        empirical=prof,
        mean_se=mse,
        var_se=vse,
        l2_error_mean=float(np.mean(l2)),
        l2_error_se=float(np.std(l2, ddof=1) / np.sqrt(l2.size)),
        sup_error_mean=float(np.mean(sup)),
        replicates=acc.n,
        block_size=block_size,
        block_seeds=seeds,
        l2_errors=l2,
    )


def _params_of(spec: StudySpec) -> dict:
    cfg = spec.config
    out = {"algorithm": spec.algorithm}
    for key in ("n", "m", "theta", "p"):
        if hasattr(cfg, key):
            out[key] = getattr(cfg, key)
    if hasattr(cfg, "target"):
        out["target"] = cfg.target.tag
    return out


def run_study(spec: StudySpec, threads: int = 1, distances: bool = True) -> StudyResult:
    """Simulate ``spec.replicates`` paths and summarize them on ``spec.grid``.

    Parameters
    ----------
    threads : int
        Worker threads; results do not depend on it.
    distances : bool
        Also compute L2 and sup distances to the target (costlier for
        per-row knots).
    """
    nblocks = -(-spec.replicates // spec.block_size)
    sizes = [min(spec.block_size, spec.replicates - b * spec.block_size) for b in range(nblocks)]
    target = _target_of(spec.algorithm, spec.config)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda b: _run_block(spec, b, sizes[b], target, distances), range(nblocks)))
    else:
        blocks = [_run_block(spec, b, sizes[b], target, distances) for b in range(nblocks)]
    root = RngStream(spec.master_seed)
    seeds = [(root.seed, root.stream_id, (b,)) for b in range(nblocks)]
    return _summarize(blocks, spec.grid, _params_of(spec), spec.block_size, seeds)


def summarize_paths(paths: Sequence[WarpPath], grid=None, target="phi1") -> StudyResult:
    """Study summary of explicitly supplied paths (no sampling)."""
    if len(paths) < 2:
        raise InvalidParameterError("need at least two paths")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    vals = np.vstack([np.interp(grid, p.xs, p.ys) for p in paths])
    dist = [path_distances(p.xs, p.ys[None, :], target) for p in paths]
    blk = _Block(_Acc.of(vals), np.concatenate([d[0] for d in dist]), np.concatenate([d[1] for d in dist]))
    return _summarize([blk], grid, {"algorithm": "given"}, len(paths), [])


# ---------------------------------------------------------------------------
# studies

def _config_for(algorithm, n, theta, p, target):
    if algorithm == "bk":
        return BkConfig(n, theta, target)
    if algorithm == "cdf":
        return CdfConfig(n, theta, p, target)
    if algorithm == "cdh":
        return CdhConfig(n, theta)
    if algorithm == "mzw":
        return MzwConfig(n, theta, target=target)
    if algorithm == "mzw_original":
        return MzwConfig(n, 0.0, target="phi1")
    raise InvalidParameterError(f"unknown algorithm {algorithm!r}")


def convergence_study(algorithm: str, sizes, theta: float, p: float = 0.5, target="phi1",
                      replicates: int = 2000, grid=None, master_seed: int = 0,
                      reference: str = "asymptotic", threads: int = 1) -> list[dict]:
    """Empirical mean/variance errors against a reference as ``n`` grows.

    Parameters
    ----------
    reference : {"asymptotic", "exact"}
        ``exact`` uses the quadrature oracles (``bk``/``cdf`` with ``n <= 128``).

    Returns
    -------
    list of dict
        One row per size with the grid-averaged and maximal absolute errors,
        the pointwise error vectors and ``ratio`` = err(n) / err(next n).
    """
    sizes = [int(n) for n in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InvalidParameterError("sizes must increase")
    if reference not in ("asymptotic", "exact"):
        raise InvalidParameterError("reference must be 'asymptotic' or 'exact'")
    target = get_target(target)
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    rows = []
    for k, n in enumerate(sizes):
        cfg = _config_for(algorithm, n, theta, p, target)
        res = run_study(StudySpec(algorithm, cfg, replicates, grid, master_seed + k), threads=threads,
                        distances=False)
        if reference == "exact":
            if algorithm not in ("bk", "cdf") or n > MAX_EXACT_N:
                raise InvalidParameterError("exact reference needs bk/cdf with n <= 128")
            ref = exact_profile(algorithm, grid, n, theta, p, target)
        else:
            ref = asymptotic_profile(grid, theta, target)
        me = np.abs(res.empirical.mean - ref.mean)
        ve = np.abs(res.empirical.variance - ref.variance)
        rows.append({
            "n": n,
            "mean_abs_error": float(np.mean(me)),
            "mean_max_error": float(np.max(me)),
            "var_abs_error": float(np.mean(ve)),
            "var_max_error": float(np.max(ve)),
            "mean_errors": me,
            "var_errors": ve,
            "mean_se": res.mean_se,
            "var_se": res.var_se,
        })
    for a, b in zip(rows, rows[1:]):
        a["mean_ratio"] = a["mean_abs_error"] / b["mean_abs_error"] if b["mean_abs_error"] > 0 else np.inf
        a["var_ratio"] = a["var_abs_error"] / b["var_abs_error"] if b["var_abs_error"] > 0 else np.inf
    return rows


def mzw_envelope(target, v, theta: float, grid):
    """Lower and upper bounds on the MZW mean with Gaussian scores.

    ``phi(t) exp(-(4/sqrt(pi)) sum(sqrt(v)) / sqrt(1+theta)) <= E[w(t)] <= phi(t) exp(sum(v) / (1+theta))``.
    """
    f = np.asarray(get_target(target).eval(np.asarray(grid, dtype=float)))
    v = np.asarray(v, dtype=float)
    lo = f * np.exp(-(4.0 / np.sqrt(np.pi)) * np.sum(np.sqrt(v)) / np.sqrt(1.0 + theta))
    hi = f * np.exp(np.sum(v) / (1.0 + theta))
    return lo, hi


def mzw_theta_limit_study(m: int, v, target, thetas, replicates: int, grid=None,
                          master_seed: int = 0, threads: int = 1) -> list[dict]:
    """Mean deviation and variance of MZW paths as the concentration grows.

    Each row holds the sup over the grid of ``|mean - phi|`` and of the
    variance, the exponential envelope and whether the empirical mean stays
    within it up to four standard errors.
    """
    target = get_target(target)
    v = default_variances(m) if v is None else np.asarray(v, dtype=float)
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    thetas = [float(x) for x in thetas]
    if any(b <= a for a, b in zip(thetas, thetas[1:])):
        raise InvalidParameterError("thetas must increase")
    f = np.asarray(target.eval(grid))
    rows = []
    for k, th in enumerate(thetas):
        cfg = MzwConfig(m, th, v=v, target=target)
        res = run_study(StudySpec("mzw", cfg, replicates, grid, master_seed + k), threads=threads,
                        distances=False)
        lo, hi = mzw_envelope(target, v, th, grid)
        mean = res.empirical.mean
        inside = bool(np.all(mean >= lo - 4 * res.mean_se) and np.all(mean <= hi + 4 * res.mean_se))
        rows.append({
            "theta": th,
            "sup_mean_dev": float(np.max(np.abs(mean - f))),
            "sup_variance": float(np.max(res.empirical.variance)),
            "upper_dev_bound": float(np.exp(np.sum(v) / (1.0 + th)) - 1.0),
            "within_envelope": inside,
            "max_mean_se": float(np.max(res.mean_se)),
        })
    return rows
