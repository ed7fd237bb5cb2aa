"""Exact and asymptotic first two moments of BK and CDF paths.

The exact oracles condition on the pair of consecutive knots ``(U_j, U_{j+1})``
that brackets the evaluation point. Given that pair, the path value is an
affine combination of Dirichlet aggregates whose first two moments are
closed-form; the outer expectation integrates over the joint density of the
pair

    n! / ((j-1)! (n-j-1)!) u**(j-1) (1-v)**(n-j-1),   0 < u < v < 1,

plus the two edge pieces ``(0, U_1)`` and ``(U_n, 1)``. Integration uses
composite Gauss-Legendre panels graded geometrically toward the evaluation
point and toward the ends of the range, with a refinement check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import AccuracyError, DomainError, InvalidParameterError, UnsupportedParameterError
from .warps import get_target

MAX_EXACT_N = 128
QUAD_TOL = 1e-8


@dataclass(frozen=True)
class MomentProfile:
    """Mean and variance curves on a grid.

    ``kind`` is ``"exact"``, ``"asymptotic"`` or ``"empirical"``; ``params``
    records the algorithm and its settings.
    """

    grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        m = np.asarray(self.mean, dtype=float)
        v = np.asarray(self.variance, dtype=float)
        if not (g.shape == m.shape == v.shape) or g.ndim != 1:
            raise InvalidParameterError("grid, mean and variance must be 1-d arrays of one length")
        if self.kind not in ("exact", "asymptotic", "empirical"):
            raise InvalidParameterError(f"unknown profile kind {self.kind!r}")
        if np.any(v < -1e-10):
            raise InvalidParameterError("variance below quadrature slack")
        if np.any(m < -1e-8) or np.any(m > 1 + 1e-8):
            raise InvalidParameterError("mean outside [0, 1]")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "variance", np.maximum(v, 0.0))

    def to_csv(self, path=None, extra: dict | None = None) -> str:
        cols = {"t": self.grid, "mean": self.mean, "variance": self.variance}
        cols.update(extra or {})
        header = ",".join(list(cols) + ["kind"])
        rows = [header]
        for i in range(self.grid.size):
            rows.append(",".join(f"{np.asarray(c)[i]:.17g}" for c in cols.values()) + f",{self.kind}")
        text = "\n".join(rows) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


# ---------------------------------------------------------------------------
# quadrature helpers

@lru_cache(maxsize=None)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _graded_breaks(length: float, depth: int, ratio: float, both: bool) -> np.ndarray:
    """Panel breakpoints on ``(0, length)`` graded geometrically toward 0 (and ``length``)."""
    g = ratio ** np.arange(depth + 1)
    pts = [np.array([0.0, 1.0]), g]
    if both:
        pts.append(1.0 - g)
    br = np.unique(np.clip(np.concatenate(pts), 0.0, 1.0))
    return br * length


def _panel_nodes(breaks: np.ndarray, order: int):
    x, w = _gauss(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    keep = weights > 0
    return nodes[keep], weights[keep]


@dataclass(frozen=True)
class _Rule:
    order: int
    depth: int
    ratio: float


_RULES = (_Rule(8, 36, 0.5), _Rule(12, 48, 0.4), _Rule(16, 64, 0.3))


def _reach(n: int) -> float:
    """Bracket width beyond which the pair density is below ~1e-13."""
    if n <= 2:
        return np.inf
    return np.log(max(n, 2) ** 2 * 1e13) / (n - 2)


# ---------------------------------------------------------------------------
# conditional moment kernels

def _check_args(t, n):
    if not 0.0 <= t <= 1.0:
        raise DomainError("t must lie in [0, 1]")
    if int(n) != n or n < 1:
        raise InvalidParameterError("n must be a positive integer")
    if n > MAX_EXACT_N:
        raise UnsupportedParameterError(
            f"exact oracles support n <= {MAX_EXACT_N}; use the asymptotic profile beyond that"
        )


def _jsum_matrices(n: int, u: np.ndarray, v: np.ndarray, powers: int):
    """``sum_j C_j j**k u**(j-1) (1-v)**(n-j-1)`` for k < powers, as (len(u), len(v)) arrays.

    ``C_j = n! / ((j-1)! (n-j-1)!)`` for ``j = 1 .. n-1`` is formed in log space
    and split evenly between the two factors before the matrix product.
    """
    j = np.arange(1, n, dtype=float)
    logC = special.gammaln(n + 1.0) - special.gammaln(j) - special.gammaln(n - j)
    lu = special.xlogy((j - 1.0)[None, :], np.maximum(u, 0.0)[:, None])
    lv = special.xlog1py((n - j - 1.0)[None, :], -np.minimum(v, 1.0)[:, None])
    Ufac = np.exp(lu + 0.5 * logC[None, :])
    Vfac = np.exp(lv + 0.5 * logC[None, :])
    return [(Ufac * j[None, :] ** k) @ Vfac.T for k in range(powers)]


def _interior(alg, t, s, n, c, p, target, rule):
    """Interior bracket contribution to (E[w], E[w**2])."""
    if n < 2:
        return 0.0, 0.0
    L = _reach(n)
    A = min(s, L)
    B = min(1.0 - s, L)
    a, wa = _panel_nodes(_graded_breaks(A, rule.depth, rule.ratio, both=A < L), rule.order)
    b, wb = _panel_nodes(_graded_breaks(B, rule.depth, rule.ratio, both=B < L), rule.order)
    u = s - a
    v = s + b
    W = wa[:, None] * wb[None, :]
    if alg == "bk":
        (A0,) = _jsum_matrices(n, u, v, 1)
        fu = target.eval(np.clip(u, 0.0, 1.0))[:, None]
        d = target.eval(np.clip(v, 0.0, 1.0))[None, :] - fu
        r = a[:, None] / (a[:, None] + b[None, :])
        m1 = fu + r * d
        m2 = (1.0 - c) * m1 ** 2 + c * (fu + r * r * d)
        return float(np.sum(W * A0 * m1)), float(np.sum(W * A0 * m2))
    A0, A1, A2 = _jsum_matrices(n, u, v, 3)
    xu = target.inverse(np.clip(u, 0.0, 1.0))[:, None]
    xv = target.inverse(np.clip(v, 0.0, 1.0))[None, :]
    den = xv - xu
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, (t - xu) / den, a[:, None] / (a[:, None] + b[None, :]))
    r = np.clip(r, 0.0, 1.0)
    q = r - p
    # sum over j of weights times S1 = j - p + r and S1**2, S2 = j - 1 + (1-p+rp)**2 + r**2 (1-p)**2
    s1 = A1 + q * A0
    s1sq = A2 + 2.0 * q * A1 + q * q * A0
    s2 = A1 - A0 + ((1.0 - p + r * p) ** 2 + (r * (1.0 - p)) ** 2) * A0
    e1 = np.sum(W * s1) / n
    e2 = (1.0 - c) * np.sum(W * s1sq) / n ** 2 + c * np.sum(W * s2) / n
    return float(e1), float(e2)


def _edges(alg, t, s, n, c, p, target, rule):
    """Contributions of the first piece (0, U_1) and the last piece (U_n, 1)."""
    L = _reach(n + 1) if n > 1 else np.inf
    # first piece: v = U_1 in (s, 1) with density n (1 - v)**(n-1)
    B = min(1.0 - s, L)
    b, wb = _panel_nodes(_graded_breaks(B, rule.depth, rule.ratio, both=B < L), rule.order)
    v = s + b
    dens = n * np.exp(special.xlog1py(n - 1, -np.minimum(v, 1.0)))
    if alg == "bk":
        fv = target.eval(np.clip(v, 0.0, 1.0))
        r = t / v
        m1 = r * fv
        m2 = (1.0 - c) * m1 ** 2 + c * r * r * fv
    else:
        r = t / target.inverse(np.clip(v, 0.0, 1.0))
        g = r * (1.0 - p)
        m1 = g / n
        m2 = (1.0 - c) * g * g / n ** 2 + c * g * g / n
    e1 = np.sum(wb * dens * m1)
    e2 = np.sum(wb * dens * m2)
    # last piece: u = U_n in (0, s) with density n u**(n-1)
    A = min(s, L)
    a, wa = _panel_nodes(_graded_breaks(A, rule.depth, rule.ratio, both=A < L), rule.order)
    u = s - a
    dens = n * np.exp(special.xlogy(n - 1, np.maximum(u, 0.0)))
    if alg == "bk":
        fu = target.eval(np.clip(u, 0.0, 1.0))
        d = 1.0 - fu
        r = (t - u) / (1.0 - u)
        m1 = fu + r * d
        m2 = (1.0 - c) * m1 ** 2 + c * (fu + r * r * d)
    else:
        xu = target.inverse(np.clip(u, 0.0, 1.0))
        r = (t - xu) / (1.0 - xu)
        last = 1.0 - p + r * p
        S1 = (n - 1) + last
        S2 = (n - 1) + last ** 2
        m1 = S1 / n
        m2 = (1.0 - c) * S1 ** 2 / n ** 2 + c * S2 / n
    e1 += np.sum(wa * dens * m1)
    e2 += np.sum(wa * dens * m2)
    return float(e1), float(e2)


def _raw_moments(alg, t, n, theta, p, target, tol):
    _check_args(t, n)
    target = get_target(target)
    if t == 0.0 or t == 1.0:
        # every path is pinned at the endpoints
        return np.array([t, t])
    c = 1.0 / (1.0 + theta) if theta is not None else 0.5
    s = t if alg == "bk" else float(target.eval(t))
    if not 0.0 < s < 1.0:
        raise InvalidParameterError("target maps t onto an endpoint; the bracket is degenerate")
    prev = None
    for rule in _RULES:
        i1, i2 = _interior(alg, t, s, n, c, p, target, rule)
        e1, e2 = _edges(alg, t, s, n, c, p, target, rule)
        cur = np.array([i1 + e1, i2 + e2])
        if prev is not None:
            err = float(np.max(np.abs(cur - prev)))
            if err <= tol:
                return cur
        prev = cur
    raise AccuracyError(
        f"quadrature did not reach {tol:g} (last change {err:.3g})", estimate=float(cur[0]), achieved=err
    )


def _check_theta(theta):
    if not theta > 0 or not np.isfinite(theta):
        raise InvalidParameterError("theta must be a finite positive real")


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise InvalidParameterError("p must lie in (0, 1)")


def bk_moments_exact(t: float, n: int, theta: float, target="phi1", tol: float = QUAD_TOL):
    """Exact ``(mean, variance)`` of a BK path at ``t``."""
    _check_theta(theta)
    m1, m2 = _raw_moments("bk", t, n, theta, None, target, tol)
    return float(m1), float(max(m2 - m1 * m1, 0.0))


def cdf_moments_exact(t: float, n: int, theta: float, p: float = 0.5, target="phi1", tol: float = QUAD_TOL):
    """Exact ``(mean, variance)`` of a CDF path at ``t``."""
    _check_theta(theta)
    _check_p(p)
    m1, m2 = _raw_moments("cdf", t, n, theta, p, target, tol)
    return float(m1), float(max(m2 - m1 * m1, 0.0))


def bk_mean_exact(t: float, n: int, target="phi1", tol: float = QUAD_TOL) -> float:
    """Exact mean of a BK path at ``t``; it does not depend on the concentration."""
    return float(_raw_moments("bk", t, n, None, None, target, tol)[0])


def bk_var_exact(t: float, n: int, theta: float, target="phi1", tol: float = QUAD_TOL) -> float:
    return bk_moments_exact(t, n, theta, target, tol)[1]


def cdf_mean_exact(t: float, n: int, p: float = 0.5, target="phi1", tol: float = QUAD_TOL) -> float:
    """Exact mean of a CDF path at ``t``; it does not depend on the concentration."""
    _check_p(p)
    return float(_raw_moments("cdf", t, n, None, p, target, tol)[0])


def cdf_var_exact(t: float, n: int, theta: float, p: float = 0.5, target="phi1", tol: float = QUAD_TOL) -> float:
    return cdf_moments_exact(t, n, theta, p, target, tol)[1]


def exact_profile(algorithm: str, grid, n: int, theta: float, p: float = 0.5, target="phi1") -> MomentProfile:
    """Exact mean and variance of ``bk`` or ``cdf`` paths on ``grid``."""
    target = get_target(target)
    grid = np.asarray(grid, dtype=float)
    if algorithm == "bk":
        mv = [bk_moments_exact(t, n, theta, target) for t in grid]
    elif algorithm == "cdf":
        mv = [cdf_moments_exact(t, n, theta, p, target) for t in grid]
    else:
        raise InvalidParameterError("exact profiles exist for 'bk' and 'cdf' only")
    mv = np.array(mv).reshape(-1, 2)
    params = {"algorithm": algorithm, "n": n, "theta": theta, "p": p if algorithm == "cdf" else None,
              "target": target.tag}
    return MomentProfile(grid, mv[:, 0], mv[:, 1], "exact", params)


# ---------------------------------------------------------------------------
# limits

def asymptotic_profile(grid, theta: float, target="phi1") -> MomentProfile:
    """Large-``n`` limits: mean ``phi(t)`` and variance ``phi(t)(1 - phi(t)) / (1 + theta)``."""
    _check_theta(theta)
    target = get_target(target)
    grid = np.asarray(grid, dtype=float)
    f = np.asarray(target.eval(grid), dtype=float)
    return MomentProfile(grid, f, f * (1.0 - f) / (1.0 + theta), "asymptotic",
                         {"theta": theta, "target": target.tag})


def l2_risk_limit(theta: float, target="phi1") -> float:
    """``(1 / (1 + theta)) * int_0^1 phi (1 - phi)``; theta = 0 is accepted."""
    if not theta >= 0 or not np.isfinite(theta):
        raise InvalidParameterError("theta must be a finite non-negative real")
    target = get_target(target)
    val, _ = integrate.quad(lambda x: float(target.eval(x)) * (1.0 - float(target.eval(x))), 0.0, 1.0,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val / (1.0 + theta)


def mzw_frechet_variance(v, theta: float) -> float:
    """Fréchet variance ``sum(v) / (1 + theta)`` of modified MZW paths."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0) or not theta >= 0:
        raise InvalidParameterError("v must be positive and theta non-negative")
    return float(np.sum(v) / (1.0 + theta))
