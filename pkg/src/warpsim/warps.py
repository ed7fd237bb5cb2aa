"""Warping functions: piecewise-linear paths, target warps and the smooth warp group.

A warp is a continuous increasing bijection of [0, 1]. Three representations
live here:

* :class:`WarpPath` -- knots joined by straight lines; every sampler returns one.
* :class:`TargetWarp` -- a warp with evaluable value, inverse and derivative.
* :class:`Gamma1Warp` -- a warp with strictly positive derivative, stored as its
  log-derivative on a uniform grid. The group operations, the inner product
  and the isometry ``psi`` act on this form.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .errors import DomainError, InvalidElementError, InvalidParameterError

GRID_SIZE = 2048
SLOPE_FLOOR = 1e-12


def _check_unit(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainError("evaluation points must lie in [0, 1]")
    return t


# ---------------------------------------------------------------------------
# piecewise-linear paths

@dataclass(frozen=True)
class WarpPath:
    """Piecewise-linear monotone bijection of [0, 1].

    Parameters
    ----------
    xs : array_like
        Abscissae, strictly increasing from 0 to 1.
    ys : array_like
        Ordinates, non-decreasing from 0 to 1.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float)
        ys = np.array(self.ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise InvalidParameterError("xs and ys must be 1-d arrays of equal length >= 2")
        if xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0):
            raise InvalidParameterError("xs must increase strictly from 0 to 1")
        if ys[0] != 0.0 or ys[-1] != 1.0 or np.any(np.diff(ys) < 0):
            raise InvalidParameterError("ys must be non-decreasing from 0 to 1")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __call__(self, t):
        return eval_warp(self, t)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.ys) / np.diff(self.xs)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        np.savetxt(buf, np.column_stack([self.xs, self.ys]), delimiter=",",
                   header="x,y", comments="", fmt="%.17g")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path) -> "WarpPath":
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(arr[:, 0], arr[:, 1])

    @classmethod
    def identity(cls) -> "WarpPath":
        return cls(np.array([0.0, 1.0]), np.array([0.0, 1.0]))


def eval_warp(path: WarpPath, t):
    """Linear interpolation of ``path`` at ``t``; raises DomainError off [0, 1]."""
    t = _check_unit(t)
    out = np.interp(t, path.xs, path.ys)
    return float(out) if out.ndim == 0 else out


def eval_paths(xs: np.ndarray, ys: np.ndarray, t) -> np.ndarray:
    """Evaluate a batch of piecewise-linear paths.

    ``ys`` has shape ``(M, K)``; ``xs`` is either shared (shape ``(K,)``) or
    per row (shape ``(M, K)``). ``t`` is a 1-d grid. Returns ``(M, len(t))``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    ys = np.asarray(ys, dtype=float)
    xs = np.asarray(xs, dtype=float)
    K = ys.shape[1]
    if xs.ndim == 1:
        j = np.clip(np.searchsorted(xs, t, side="right") - 1, 0, K - 2)
        w = (t - xs[j]) / (xs[j + 1] - xs[j])
        return ys[:, j] * (1.0 - w) + ys[:, j + 1] * w
    M = ys.shape[0]
    if t.size > 8:
        return np.vstack([np.interp(t, xs[i], ys[i]) for i in range(M)])
    rows = np.arange(M)
    out = np.empty((M, t.size))
    for k in range(t.size):
        j = np.clip(np.sum(xs <= t[k], axis=1) - 1, 0, K - 2)
        x0, x1 = xs[rows, j], xs[rows, j + 1]
        y0, y1 = ys[rows, j], ys[rows, j + 1]
        out[:, k] = y0 + (t[k] - x0) / (x1 - x0) * (y1 - y0)
    return out


# ---------------------------------------------------------------------------
# target warps

def bisect_inverse(f, u, tol=1e-12, max_iter=200):
    """Generalized inverse ``inf{t : f(t) >= u}`` of a non-decreasing ``f`` by bisection."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.ones_like(u)
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        above = np.asarray(f(mid)) >= u
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return hi


class TargetWarp:
    """Absolutely continuous warp with value, inverse and derivative.

    Subclasses override the three ``_eval``, ``_inverse`` and ``_derivative``
    hooks; the public methods add domain checks and scalar handling.
    """

    tag = "target"

    def _eval(self, t):
        raise NotImplementedError

    def _inverse(self, u):
        return bisect_inverse(self._eval, u)

    def _derivative(self, t):
        raise NotImplementedError

    @staticmethod
    def _ret(x):
        x = np.asarray(x, dtype=float)
        return float(x) if x.ndim == 0 else x

    def eval(self, t):
        return self._ret(self._eval(_check_unit(t)))

    __call__ = eval

    def inverse(self, u):
        return self._ret(self._inverse(_check_unit(u)))

    def derivative(self, t):
        return self._ret(self._derivative(_check_unit(t)))

    def derivative_sup(self, grid_size=GRID_SIZE) -> float:
        """Largest derivative value on a uniform grid."""
        return float(np.max(self._derivative(np.linspace(0.0, 1.0, grid_size))))

    def __repr__(self):
        return f"{type(self).__name__}({self.tag!r})"


class IdentityTarget(TargetWarp):
    tag = "phi1"

    def _eval(self, t):
        return t

    def _inverse(self, u):
        return u

    def _derivative(self, t):
        return np.ones_like(t)


class BetaCdfTarget(TargetWarp):
    """Beta(a, b) distribution function, ``phi2`` for (5, 2)."""

    def __init__(self, a=5.0, b=2.0, tag=None):
        if a <= 0 or b <= 0:
            raise InvalidParameterError("Beta shapes must be > 0")
        self.a, self.b = float(a), float(b)
        self.tag = tag or f"beta({self.a:g},{self.b:g})"
        self._logB = special.betaln(self.a, self.b)

    def _eval(self, t):
        return special.betainc(self.a, self.b, t)

    def _inverse(self, u):
        x = special.betaincinv(self.a, self.b, u)
        # one guarded Newton step to polish the library inverse
        d = self._derivative(x)
        step = np.where(d > 1e-8, (special.betainc(self.a, self.b, x) - u) / np.where(d > 1e-8, d, 1.0), 0.0)
        x2 = np.clip(x - step, 0.0, 1.0)
        better = np.abs(special.betainc(self.a, self.b, x2) - u) < np.abs(special.betainc(self.a, self.b, x) - u)
        return np.where(better, x2, x)

    def _derivative(self, t):
        with np.errstate(divide="ignore", invalid="ignore"):
            logd = (self.a - 1) * np.log(t) + (self.b - 1) * np.log1p(-t) - self._logB
        return np.nan_to_num(np.exp(logd), nan=0.0, posinf=np.inf)


class ExponentialTarget(TargetWarp):
    """``(exp(-k t) - 1) / (exp(-k) - 1)``; ``phi3`` for k = 5."""

    def __init__(self, k=5.0, tag=None):
        if k == 0:
            raise InvalidParameterError("rate must be non-zero; use the identity target")
        self.k = float(k)
        self.tag = tag or f"exp({self.k:g})"
        self._den = np.expm1(-self.k)

    def _eval(self, t):
        return np.expm1(-self.k * t) / self._den

    def _inverse(self, u):
        x = -np.log1p(u * self._den) / self.k
        return np.where(u >= 1.0, 1.0, x)

    def _derivative(self, t):
        return -self.k * np.exp(-self.k * t) / self._den


class PiecewiseLinearTarget(TargetWarp):
    """Target built from knots; the empirical-target form used for fitted means.

    Evaluation is linear interpolation, the derivative is the right-continuous
    piecewise slope and the inverse is the exact generalized inverse
    ``inf{t : phi(t) >= u}`` of the polygon.
    """

    def __init__(self, xs, ys, tag="piecewise"):
        self.path = WarpPath(xs, ys)
        self.tag = tag
        ys_u, first = np.unique(self.path.ys, return_index=True)
        self._inv_x = ys_u
        self._inv_y = self.path.xs[first]
        self._slopes = self.path.slopes

    @classmethod
    def from_path(cls, path: WarpPath, tag="piecewise"):
        return cls(path.xs, path.ys, tag=tag)

    def _eval(self, t):
        return np.interp(t, self.path.xs, self.path.ys)

    def _inverse(self, u):
        return np.interp(u, self._inv_x, self._inv_y)

    def _derivative(self, t):
        j = np.clip(np.searchsorted(self.path.xs, t, side="right") - 1, 0, self._slopes.size - 1)
        return self._slopes[j]


class CallableTarget(TargetWarp):
    """Target from user callables; the inverse defaults to bisection."""

    def __init__(self, func, derivative, inverse=None, tag="custom"):
        self._f, self._d, self._i = func, derivative, inverse
        self.tag = tag

    def _eval(self, t):
        return np.asarray(self._f(t), dtype=float)

    def _inverse(self, u):
        if self._i is None:
            return bisect_inverse(self._eval, u)
        return np.asarray(self._i(u), dtype=float)

    def _derivative(self, t):
        return np.asarray(self._d(t), dtype=float)


PHI1 = IdentityTarget()
PHI2 = BetaCdfTarget(5.0, 2.0, tag="phi2")
PHI3 = ExponentialTarget(5.0, tag="phi3")
BUILTIN_TARGETS = {"phi1": PHI1, "phi2": PHI2, "phi3": PHI3}


def get_target(spec) -> TargetWarp:
    """Resolve ``phi1``/``phi2``/``phi3``, ``file:PATH`` (two-column knot CSV) or a TargetWarp."""
    if isinstance(spec, TargetWarp):
        return spec
    if isinstance(spec, str):
        if spec in BUILTIN_TARGETS:
            return BUILTIN_TARGETS[spec]
        if spec.startswith("file:"):
            path = WarpPath.from_csv(spec[5:])
            return PiecewiseLinearTarget.from_path(path, tag=spec)
    raise InvalidParameterError(f"unknown target {spec!r}")


# ---------------------------------------------------------------------------
# smooth warp group

def unit_grid(size: int = GRID_SIZE) -> np.ndarray:
    return np.linspace(0.0, 1.0, size)


def trapezoid_mean(values: np.ndarray) -> float:
    """Trapezoidal integral over [0, 1] of values on a uniform grid (last axis)."""
    v = np.asarray(values, dtype=float)
    h = 1.0 / (v.shape[-1] - 1)
    return h * (v.sum(axis=-1) - 0.5 * (v[..., 0] + v[..., -1]))


def cumulative_exp(logd: np.ndarray) -> np.ndarray:
    """Normalized cumulative integral of ``exp(logd)`` on a uniform grid.

    Each cell integrates the exponential of the linear interpolant of
    ``logd`` exactly, which keeps every increment positive and reproduces
    exponentials of affine functions to rounding error.
    """
    logd = np.asarray(logd, dtype=float)
    h = 1.0 / (logd.shape[-1] - 1)
    top = np.max(logd, axis=-1, keepdims=True)
    a = logd[..., :-1] - top
    b = logd[..., 1:] - top
    d = np.abs(b - a)
    small = d < 1e-6
    safe = np.where(small, 1.0, d)
    # (exp(b) - exp(a)) / (b - a) = exp(max) * (1 - exp(-d)) / d; never overflows
    cell = np.exp(np.maximum(a, b)) * np.where(small, 1.0 - d / 2.0 + d * d / 6.0, -np.expm1(-safe) / safe) * h
    cum = np.concatenate([np.zeros(logd.shape[:-1] + (1,)), np.cumsum(cell, axis=-1)], axis=-1)
    out = cum / cum[..., -1:]
    out[..., -1] = 1.0
    return out


@dataclass(frozen=True)
class HFunction:
    """Zero-mean function sampled on a uniform grid of [0, 1]."""

    values: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise InvalidElementError("HFunction needs a 1-d grid of size >= 2")
        if np.any(~np.isfinite(v)):
            raise InvalidElementError("HFunction values must be finite")
        if self.check and abs(trapezoid_mean(v)) > 1e-9:
            raise InvalidElementError("HFunction must have zero trapezoidal mean")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> np.ndarray:
        return unit_grid(self.values.size)

    def norm2(self) -> float:
        """Squared L2 norm by the trapezoid rule."""
        return float(trapezoid_mean(self.values ** 2))

    def __add__(self, other):
        return HFunction(self.values + np.asarray(getattr(other, "values", other)), check=False)

    def __sub__(self, other):
        return HFunction(self.values - np.asarray(getattr(other, "values", other)), check=False)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        np.savetxt(buf, self.values, header="h", comments="", fmt="%.17g")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path) -> "HFunction":
        return cls(np.loadtxt(path, skiprows=1, ndmin=1))


@dataclass(frozen=True)
class Gamma1Warp:
    """Warp with strictly positive derivative, stored as log-derivative on a grid.

    The log-derivative is defined up to an additive constant; ``values`` is
    the normalized cumulative integral of ``exp(logd)``.
    """

    logd: np.ndarray

    def __post_init__(self):
        ld = np.array(self.logd, dtype=float)
        if ld.ndim != 1 or ld.size < 2:
            raise InvalidElementError("log-derivative grid must be 1-d with size >= 2")
        if np.any(~np.isfinite(ld)):
            raise InvalidElementError("log-derivative must be finite on the grid")
        ld.setflags(write=False)
        object.__setattr__(self, "logd", ld)

    @property
    def size(self) -> int:
        return self.logd.size

    @property
    def grid(self) -> np.ndarray:
        return unit_grid(self.size)

    @property
    def values(self) -> np.ndarray:
        return cumulative_exp(self.logd)

    def to_path(self) -> WarpPath:
        return WarpPath(self.grid, self.values)

    def __call__(self, t):
        return eval_warp(self.to_path(), t)

    @classmethod
    def from_derivative(cls, deriv, clamp=False) -> "Gamma1Warp":
        d = np.asarray(deriv, dtype=float)
        if np.any(~np.isfinite(d)):
            raise InvalidElementError("derivative must be finite on the grid")
        if clamp:
            d = np.maximum(d, SLOPE_FLOOR)
        elif np.any(d <= 0):
            raise InvalidElementError("derivative must be strictly positive on the grid")
        return cls(np.log(d))

    @classmethod
    def from_target(cls, target: TargetWarp, size=GRID_SIZE, clamp=False) -> "Gamma1Warp":
        return cls.from_derivative(target.derivative(unit_grid(size)), clamp=clamp)

    @classmethod
    def from_path(cls, path: WarpPath, size=GRID_SIZE) -> "Gamma1Warp":
        """Right-continuous piecewise slope of ``path`` at grid nodes, clamped below at 1e-12."""
        t = unit_grid(size)
        s = path.slopes
        j = np.clip(np.searchsorted(path.xs, t, side="right") - 1, 0, s.size - 1)
        return cls.from_derivative(s[j], clamp=True)

    @classmethod
    def identity(cls, size=GRID_SIZE) -> "Gamma1Warp":
        return cls(np.zeros(size))


def as_gamma1(f, size=GRID_SIZE) -> Gamma1Warp:
    """Coerce a Gamma1Warp, TargetWarp or WarpPath to the grid form."""
    if isinstance(f, Gamma1Warp):
        return f
    if isinstance(f, TargetWarp):
        return Gamma1Warp.from_target(f, size)
    if isinstance(f, WarpPath):
        return Gamma1Warp.from_path(f, size)
    raise InvalidElementError(f"cannot interpret {type(f).__name__} as a smooth warp")


def _pair(f, g):
    f = as_gamma1(f)
    g = as_gamma1(g, f.size)
    if f.size != g.size:
        raise InvalidElementError("warps live on different grids")
    return f, g


def gamma_plus(f, g) -> Gamma1Warp:
    """Perturbation ``f (+) g = int_0^. f'g' / int_0^1 f'g'``."""
    f, g = _pair(f, g)
    return Gamma1Warp(f.logd + g.logd)


def gamma_scale(a: float, f) -> Gamma1Warp:
    """Power ``a (.) f = int_0^. (f')^a / int_0^1 (f')^a``."""
    f = as_gamma1(f)
    return Gamma1Warp(float(a) * f.logd)


def gamma_minus(f, g) -> Gamma1Warp:
    """``f (-) g = f (+) ((-1) (.) g)``."""
    return gamma_plus(f, gamma_scale(-1.0, g))


def gamma_inner(f, g) -> float:
    """``int log f' log g' - int log f' int log g'`` by the trapezoid rule."""
    f, g = _pair(f, g)
    mf = trapezoid_mean(f.logd)
    mg = trapezoid_mean(g.logd)
    return float(trapezoid_mean((f.logd - mf) * (g.logd - mg)))


def gamma_norm2(f) -> float:
    return gamma_inner(f, f)


def psi(f) -> HFunction:
    """``log f' - int log f'`` on the grid."""
    f = as_gamma1(f)
    return HFunction(f.logd - trapezoid_mean(f.logd), check=False)


def psi_inverse(h) -> Gamma1Warp:
    """``int_0^. exp(h) / int_0^1 exp(h)``; inverse of :func:`psi` on zero-mean functions."""
    v = np.asarray(getattr(h, "values", h), dtype=float)
    if v.ndim != 1 or np.any(~np.isfinite(v)):
        raise InvalidElementError("h must be a finite 1-d grid function")
    return Gamma1Warp(v)


# ---------------------------------------------------------------------------
# Fourier basis and covariance kernel

def fourier_basis(i: int, t):
    """Orthonormal Fourier basis without the constant, cosine first.

    ``phi_{2k-1}(t) = sqrt(2) cos(2 pi k t)`` and ``phi_{2k}(t) = sqrt(2) sin(2 pi k t)``.
    """
    if int(i) != i or i < 1:
        raise InvalidParameterError("basis index must be a positive integer")
    i = int(i)
    t = np.asarray(t, dtype=float)
    k = (i + 1) // 2
    trig = np.cos if i % 2 == 1 else np.sin
    out = np.sqrt(2.0) * trig(2.0 * np.pi * k * t)
    return float(out) if out.ndim == 0 else out


def fourier_matrix(m: int, t) -> np.ndarray:
    """Rows ``phi_1 .. phi_m`` evaluated on ``t``; shape ``(m, len(t))``."""
    t = np.asarray(t, dtype=float)
    return np.vstack([fourier_basis(i, t) for i in range(1, m + 1)]) if m else np.zeros((0, t.size))


def kernel_K(s, t, v):
    """``sum_i v_i phi_i(s) phi_i(t)`` for a finite non-negative sequence ``v``."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or np.any(~np.isfinite(v)):
        raise InvalidParameterError("kernel weights must be finite and >= 0")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = sum(v[i - 1] * fourier_basis(i, s) * fourier_basis(i, t) for i in range(1, v.size + 1))
    out = np.asarray(out, dtype=float) * np.ones(np.broadcast(s, t).shape)
    return float(out) if out.ndim == 0 else out
