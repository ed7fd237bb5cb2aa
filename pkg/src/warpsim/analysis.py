"""Distribution drift through quantile warps.

Each period's quantile function is modelled as the reference quantile
function composed with a random warp drawn by the CDF sampler. The pipeline
splits a period's data into ``m`` random parts, maps every part to a warp
against the reference, estimates the mean warp and the concentration, and
builds a constant-width sup-norm band by parametric bootstrap.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateEstimateError,
    DegenerateWarpError,
    IngestionError,
    InsufficientSampleError,
    InvalidParameterError,
)
from .rng import RngStream
from .samplers import CdfConfig, cdf_batch
from .warps import PiecewiseLinearTarget, WarpPath, eval_paths

ANALYSIS_GRID_SIZE = 1001
THETA_FLOOR = 1e-6


class NegativeThetaWarning(UserWarning):
    """The concentration estimate came out negative."""


def analysis_grid(size: int = ANALYSIS_GRID_SIZE) -> np.ndarray:
    return np.linspace(0.0, 1.0, size)


def _trapezoid(y, x) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


# ---------------------------------------------------------------------------
# quantile functions and warps

@dataclass(frozen=True)
class QuantileFunction:
    """Piecewise-linear quantile function.

    ``probs`` starts at 0 and ends at 1; the end values are the smallest and
    largest interior values.
    """

    probs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if p.ndim != 1 or p.shape != v.shape or p.size < 2:
            raise InvalidParameterError("probs and values must be 1-d of equal length >= 2")
        if p[0] != 0.0 or p[-1] != 1.0 or np.any(np.diff(p) <= 0):
            raise InvalidParameterError("probs must increase strictly from 0 to 1")
        if np.any(np.diff(v) < 0) or np.any(~np.isfinite(v)):
            raise InvalidParameterError("values must be finite and non-decreasing")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "values", v)

    def __call__(self, prob):
        out = np.interp(np.asarray(prob, dtype=float), self.probs, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def _vertex_table(self):
        """Polyline in (value, prob) with vertical pieces on flat stretches."""
        vals, first = np.unique(self.values, return_index=True)
        last = np.r_[first[1:] - 1, self.values.size - 1]
        V = np.repeat(vals, 2)
        P = np.empty_like(V)
        P[0::2] = self.probs[first]
        P[1::2] = self.probs[last]
        return V, P

    def cdf_bounds(self, y):
        """Left and right generalized inverses ``(F-(y), F+(y))``, clipped to [0, 1]."""
        V, P = self._vertex_table()
        raw = np.asarray(y, dtype=float)
        y = np.clip(raw, V[0], V[-1])
        lo_i = np.searchsorted(V, y, side="left")
        hi_i = np.searchsorted(V, y, side="right") - 1
        lo = _interp_vertex(V, P, y, lo_i, left=True)
        hi = _interp_vertex(V, P, y, hi_i, left=False)
        # strictly outside the support both inverses sit at the boundary
        lo = np.where(raw > V[-1], 1.0, np.where(raw < V[0], 0.0, lo))
        hi = np.where(raw > V[-1], 1.0, np.where(raw < V[0], 0.0, hi))
        return lo, hi


def _interp_vertex(V, P, y, idx, left):
    idx = np.clip(idx, 0, V.size - 1)
    exact = V[idx] == y
    if left:
        a = np.clip(idx - 1, 0, V.size - 1)
        b = idx
    else:
        a = idx
        b = np.clip(idx + 1, 0, V.size - 1)
    span = V[b] - V[a]
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.where(span > 0, (y - V[a]) / span, 0.0)
    return np.where(exact, P[idx], P[a] + lam * (P[b] - P[a]))


def empirical_quantile(data) -> QuantileFunction:
    """Quantile function through ``(k / (N + 1), x_(k))`` plus ``(0, min)`` and ``(1, max)``."""
    x = np.sort(np.asarray(data, dtype=float).ravel())
    if x.size == 0:
        raise InvalidParameterError("empirical quantile of empty data")
    if np.any(~np.isfinite(x)):
        raise InvalidParameterError("data must be finite")
    N = x.size
    probs = np.r_[0.0, np.arange(1, N + 1) / (N + 1.0), 1.0]
    values = np.r_[x[0], x, x[-1]]
    return QuantileFunction(probs, values)


def warp_from_quantiles(reference: QuantileFunction, sample_q: QuantileFunction,
                        grid=None) -> WarpPath:
    """Rescaled warp ``(g - g(0)) / (g(1) - g(0))`` with ``g = F_ref o Q_sample``.

    ``F_ref`` is the generalized inverse of the reference quantile function.
    Where either function is flat the composition is resolved linearly, so a
    quantile function compared with itself gives the identity.
    """
    grid = analysis_grid() if grid is None else np.asarray(grid, dtype=float)
    y = sample_q(grid)
    f_lo, f_hi = reference.cdf_bounds(y)
    s_lo, s_hi = sample_q.cdf_bounds(y)
    width = s_hi - s_lo
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.where(width > 0, (grid - s_lo) / width, 0.5)
    lam = np.clip(lam, 0.0, 1.0)
    g = f_lo + lam * (f_hi - f_lo)
    g = np.maximum.accumulate(g)
    span = g[-1] - g[0]
    if not span > 0:
        raise DegenerateWarpError("the composed warp is constant; the sample misses the reference range")
    w = (g - g[0]) / span
    w[0], w[-1] = 0.0, 1.0
    return WarpPath(grid, np.clip(w, 0.0, 1.0))


# ---------------------------------------------------------------------------
# estimators

def _warp_matrix(warps, grid) -> np.ndarray:
    if isinstance(warps, np.ndarray):
        W = np.asarray(warps, dtype=float)
        if W.ndim != 2 or W.shape[1] != grid.size:
            raise InvalidParameterError("warp matrix must have one column per grid point")
        return W
    warps = list(warps)
    return np.vstack([np.interp(grid, w.xs, w.ys) for w in warps]) if warps else np.zeros((0, grid.size))


def estimate_phi(warps, grid=None) -> np.ndarray:
    """Pointwise average of the warps on ``grid`` (default 1001 nodes)."""
    grid = analysis_grid() if grid is None else np.asarray(grid, dtype=float)
    W = _warp_matrix(warps, grid)
    if W.shape[0] < 2:
        raise InsufficientSampleError("estimate_phi needs at least two warps")
    return W.mean(axis=0)


@dataclass(frozen=True)
class ThetaEstimate:
    value: float
    negative: bool
    numerator: float
    denominator: float

    def __float__(self):
        return self.value


def estimate_theta_details(warps, phi_hat=None, grid=None, numerator: str = "mean") -> ThetaEstimate:
    """Concentration estimate ``int phi_hat (1 - phi_hat) / int v_hat - 1``.

    Parameters
    ----------
    numerator : {"mean", "pooled"}
        ``mean`` integrates ``phi_hat (1 - phi_hat)``. ``pooled`` integrates
        the average of ``w_j (1 - w_j)`` instead; it is offered only as a
        diagnostic and equals the ``mean`` estimate minus ``(m - 1) / m``.
    """
    grid = analysis_grid() if grid is None else np.asarray(grid, dtype=float)
    W = _warp_matrix(warps, grid)
    if W.shape[0] < 2:
        raise InsufficientSampleError("estimate_theta needs at least two warps")
    ph = W.mean(axis=0) if phi_hat is None else np.asarray(phi_hat, dtype=float)
    v = W.var(axis=0, ddof=1)
    den = _trapezoid(v, grid)
    if not den > 0 or np.all(W == W[0]):
        raise DegenerateEstimateError("integrated sample variance is zero; all warps coincide")
    if numerator == "mean":
        num = _trapezoid(ph * (1.0 - ph), grid)
    elif numerator == "pooled":
        num = _trapezoid(np.mean(W * (1.0 - W), axis=0), grid)
    else:
        raise InvalidParameterError("numerator must be 'mean' or 'pooled'")
    val = num / den - 1.0
    neg = val < 0
    if neg:
        warnings.warn(f"negative concentration estimate {val:.4g}", NegativeThetaWarning, stacklevel=3)
    return ThetaEstimate(float(val), bool(neg), num, den)


def estimate_theta(warps, phi_hat=None, grid=None, numerator: str = "mean") -> float:
    """See :func:`estimate_theta_details`; negative values are returned with a warning."""
    return estimate_theta_details(warps, phi_hat, grid, numerator).value


def theta_study(theta: float, n_values, m: int = 50, B: int = 100, master_seed: int = 0,
                grid=None, p: float = 0.5, numerator: str = "mean") -> list[dict]:
    """Mean and standard deviation of ``theta_hat / theta`` over ``B`` runs per ``n``.

    Each run draws ``m`` CDF paths with the identity target. Run ``b`` at the
    ``k``-th size uses the stream ``RngStream(master_seed).child(k).child(b)``.
    """
    grid = analysis_grid() if grid is None else np.asarray(grid, dtype=float)
    root = RngStream(master_seed)
    rows = []
    for k, n in enumerate(n_values):
        cfg = CdfConfig(int(n), theta, p, "phi1")
        ratios = np.empty(B)
        for b in range(B):
            xs, ys = cdf_batch(cfg, m, root.child(k).child(b))
            W = eval_paths(xs, ys, grid)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NegativeThetaWarning)
                ratios[b] = estimate_theta(W, grid=grid, numerator=numerator) / theta
        rows.append({"theta": theta, "n": int(n), "mean_ratio": float(ratios.mean()),
                     "sd_ratio": float(ratios.std(ddof=1)), "ratios": ratios})
    return rows


# ---------------------------------------------------------------------------
# bootstrap bands

@dataclass(frozen=True)
class BandResult:
    grid: np.ndarray
    phi_hat: np.ndarray
    centered: np.ndarray
    half_width: float
    alpha: float
    theta_hat: float
    replicates_used: int
    theta_clamped: bool = False
    sup_distances: Optional[np.ndarray] = field(default=None, repr=False)
    seed: int = 0

    def __post_init__(self):
        if not self.half_width >= 0:
            raise InvalidParameterError("half width must be >= 0")

    @property
    def lower(self) -> np.ndarray:
        return self.centered - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.centered + self.half_width

    def contains_zero(self) -> bool:
        return bool(np.all((self.lower <= 0.0) & (self.upper >= 0.0)))

    def above_zero(self) -> np.ndarray:
        """Grid mask where the whole band lies above 0."""
        return self.lower > 0.0

    def to_csv(self, path=None) -> str:
        lines = ["prob,phi_hat,centered,lower,upper"]
        for row in zip(self.grid, self.phi_hat, self.centered, self.lower, self.upper):
            lines.append(",".join(f"{x:.17g}" for x in row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def metadata(self) -> dict:
        return {"theta_hat": self.theta_hat, "theta_clamped": self.theta_clamped, "h": self.half_width,
                "alpha": self.alpha, "B": self.replicates_used, "seed": self.seed}


def sup_quantile(values, alpha: float) -> float:
    """The ``ceil((1 - alpha) B)``-th smallest of ``B`` values."""
    v = np.sort(np.asarray(values, dtype=float))
    k = math.ceil((1.0 - alpha) * v.size - 1e-12)
    return float(v[min(max(k, 1), v.size) - 1])


def bootstrap_bands(phi_hat, theta_hat: float, p: float, n_i: int, m: int, B: int, alpha: float,
                    grid=None, master_seed: int = 0) -> BandResult:
    """Parametric bootstrap band of constant half-width around ``phi_hat``.

    Replicate ``b`` (stream ``RngStream(master_seed).child(b)``) averages
    ``m`` CDF paths with target ``phi_hat``, concentration ``theta_hat`` and
    size ``n_i``; the half-width is the ``1 - alpha`` empirical quantile of
    the sup distances between ``phi_hat`` and the replicate means.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("alpha must lie in (0, 1)")
    if B < 20:
        raise InvalidParameterError("B must be >= 20")
    if m < 1 or n_i < 1:
        raise InvalidParameterError("m and n_i must be >= 1")
    grid = analysis_grid() if grid is None else np.asarray(grid, dtype=float)
    ph = np.asarray(phi_hat, dtype=float)
    clamped = not theta_hat > 0
    th = THETA_FLOOR if clamped else float(theta_hat)
    target = PiecewiseLinearTarget(grid, ph, tag="phi_hat")
    cfg = CdfConfig(int(n_i), th, p, target)
    root = RngStream(master_seed)
    sups = np.empty(B)
    for b in range(B):
        xs, ys = cdf_batch(cfg, m, root.child(b))
        mean_b = eval_paths(xs, ys, grid).mean(axis=0)
        sups[b] = np.max(np.abs(ph - mean_b))
    h = sup_quantile(sups, alpha)
    return BandResult(grid, ph, ph - grid, h, alpha, float(theta_hat), B, clamped, sups, master_seed)


# ---------------------------------------------------------------------------
# data handling

@dataclass(frozen=True)
class Observations:
    timestamps: np.ndarray  # datetime64[s]
    values: np.ndarray
    skipped: int = 0

    def __len__(self):
        return self.values.size

    def records(self):
        return list(zip(self.timestamps.astype("datetime64[s]").tolist(), self.values.tolist()))


@dataclass(frozen=True)
class PeriodDataset:
    label: str
    observations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "observations", np.asarray(self.observations, dtype=float).ravel())

    @property
    def count(self) -> int:
        return int(self.observations.size)


def load_observations_csv(path, timestamp_col: str = "timestamp", value_col: str = "value") -> Observations:
    """Read a UTF-8 CSV with a header and ISO-8601 timestamps.

    Rows whose value is missing or non-numeric are skipped; the number
    skipped is stored on the result and reported as a warning.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc
    ts, vals, skipped = [], [], 0
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or timestamp_col not in reader.fieldnames or value_col not in reader.fieldnames:
            raise IngestionError(f"{path}: header must contain {timestamp_col!r} and {value_col!r}")
        for row in reader:
            try:
                t = datetime.fromisoformat(row[timestamp_col].strip())
                v = float(row[value_col])
            except (ValueError, TypeError, AttributeError):
                skipped += 1
                continue
            if not math.isfinite(v):
                skipped += 1
                continue
            ts.append(np.datetime64(t.replace(tzinfo=None), "s"))
            vals.append(v)
    if skipped:
        warnings.warn(f"{path}: skipped {skipped} row(s) with missing or invalid values", stacklevel=2)
    if not vals:
        raise IngestionError(f"{path}: no valid rows")
    return Observations(np.array(ts, dtype="datetime64[s]"), np.array(vals), skipped)


def write_observations_csv(obs: Observations, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value"])
        for t, v in zip(obs.timestamps.astype("datetime64[s]").astype(str), obs.values):
            w.writerow([t, repr(float(v))])


def _to_dt64(x):
    if isinstance(x, str):
        return np.datetime64(datetime.fromisoformat(x), "s")
    return np.datetime64(x, "s")


def split_periods(obs: Observations, periods) -> list[PeriodDataset]:
    """Assign observations to half-open periods ``[start, end)``.

    ``periods`` is a sequence of ``(label, start, end)`` triples, or a sorted
    sequence of boundary timestamps defining consecutive periods. Records
    outside every period are dropped.
    """
    periods = list(periods)
    if periods and not isinstance(periods[0], (tuple, list)):
        bounds = [_to_dt64(b) for b in periods]
        if any(b <= a for a, b in zip(bounds, bounds[1:])):
            raise InvalidParameterError("boundaries must be sorted")
        periods = [(f"{a}/{b}", a, b) for a, b in zip(bounds, bounds[1:])]
    out = []
    for label, start, end in periods:
        s, e = _to_dt64(start), _to_dt64(end)
        if e <= s:
            raise InvalidParameterError(f"period {label!r} ends before it starts")
        mask = (obs.timestamps >= s) & (obs.timestamps < e)
        out.append(PeriodDataset(str(label), obs.values[mask]))
    return out


def random_split(dataset: PeriodDataset, m: int, rng: RngStream) -> list[PeriodDataset]:
    """Random partition into ``m`` parts whose sizes differ by at most one."""
    if m < 1:
        raise InvalidParameterError("m must be >= 1")
    if m > dataset.count:
        raise InvalidParameterError(f"cannot split {dataset.count} observations of {dataset.label!r} into {m} parts")
    perm = rng.permutation(dataset.count)
    return [PeriodDataset(f"{dataset.label}#{k}", dataset.observations[idx])
            for k, idx in enumerate(np.array_split(perm, m))]


@dataclass(frozen=True)
class SyntheticPeriod:
    """One period of synthetic hourly data.

    ``shift`` is added to every value and ``scale`` multiplies the noise.
    """

    label: str
    start: str
    hours: int
    shift: float = 0.0
    scale: float = 1.0


def synthesize_temperature(periods: Sequence[SyntheticPeriod], rng: RngStream,
                           mean: float = 6.0, seasonal: float = 12.0, diurnal: float = 4.0,
                           noise: float = 3.0) -> Observations:
    """Hourly seasonal-plus-noise series, one block of ``hours`` records per period."""
    ts, vals = [], []
    for k, per in enumerate(periods):
        if per.hours < 0:
            raise InvalidParameterError("hours must be >= 0")
        start = datetime.fromisoformat(per.start)
        hrs = np.arange(per.hours)
        stamps = np.datetime64(start, "s") + hrs.astype("timedelta64[h]")
        doy = (stamps - stamps.astype("datetime64[Y]")).astype("timedelta64[h]").astype(float) / (24 * 365.25)
        hod = (stamps - stamps.astype("datetime64[D]")).astype("timedelta64[h]").astype(float) / 24.0
        base = (mean - seasonal * np.cos(2 * np.pi * (doy - 0.03)) - diurnal * np.cos(2 * np.pi * (hod - 0.15)))
        eps = rng.child(k).standard_normal(per.hours) * noise * per.scale
        ts.append(stamps.astype("datetime64[s]"))
        vals.append(base + eps + per.shift)
    if not ts:
        return Observations(np.array([], dtype="datetime64[s]"), np.array([]), 0)
    return Observations(np.concatenate(ts), np.concatenate(vals), 0)


def period_bounds(periods: Sequence[SyntheticPeriod]):
    """``(label, start, end)`` triples matching a synthetic specification."""
    out = []
    for per in periods:
        s = datetime.fromisoformat(per.start)
        out.append((per.label, s, s + timedelta(hours=per.hours)))
    return out


# ---------------------------------------------------------------------------
# pipeline

@dataclass(frozen=True)
class PeriodAnalysis:
    label: str
    count: int
    n_i: int
    theta: ThetaEstimate
    band: BandResult


def analyze_periods(datasets: Sequence[PeriodDataset], reference: str, m: int = 50, alpha: float = 0.05,
                    B: int = 100, p: float = 0.5, master_seed: int = 0, grid=None) -> list[PeriodAnalysis]:
    """Warp every period against the reference period and band its mean warp.

    Period ``k`` splits its data with ``RngStream(master_seed).child(k).child(0)``
    and seeds its bootstrap with a value derived from ``(master_seed, k)``.
    """
    grid = analysis_grid() if grid is None else np.asarray(grid, dtype=float)
    by_label = {d.label: d for d in datasets}
    if reference not in by_label:
        raise InvalidParameterError(f"reference period {reference!r} not found")
    for ds in datasets:
        if ds.count < m:
            raise InvalidParameterError(f"period {ds.label!r} has {ds.count} observations, fewer than m={m}")
    ref_q = empirical_quantile(by_label[reference].observations)
    root = RngStream(master_seed)
    out = []
    for k, ds in enumerate(datasets):
        stream = root.child(k)
        parts = random_split(ds, m, stream.child(0))
        try:
            warps = [warp_from_quantiles(ref_q, empirical_quantile(pt.observations), grid) for pt in parts]
        except DegenerateWarpError as exc:
            raise DegenerateWarpError(f"period {ds.label!r}: {exc}") from exc
        W = _warp_matrix(warps, grid)
        ph = W.mean(axis=0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NegativeThetaWarning)
            th = estimate_theta_details(W, ph, grid)
        n_i = ds.count // m
        boot_seed = int(np.random.SeedSequence([master_seed, k, 1]).generate_state(1, dtype=np.uint64)[0])
        band = bootstrap_bands(ph, th.value, p, n_i, m, B, alpha, grid, boot_seed)
        out.append(PeriodAnalysis(ds.label, ds.count, n_i, th, band))
    return out


def analysis_report(results: Sequence[PeriodAnalysis]) -> str:
    return json.dumps([{"label": r.label, "count": r.count, "n_i": r.n_i, "theta_hat": r.theta.value,
                        "theta_negative": r.theta.negative, "h": r.band.half_width,
                        "contains_zero": r.band.contains_zero()} for r in results], indent=2)
