"""Seeded random primitives.

Every random draw in the package goes through an :class:`RngStream`. A stream
is identified by ``(seed, stream_id)`` plus the path of ``split`` calls that
produced it, and wraps a PCG64 generator keyed by a ``SeedSequence``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SamplingError

_MASK64 = (1 << 64) - 1
_MAX_REDRAWS = 64


class RngStream:
    """Splittable, reproducible random source.

    Parameters
    ----------
    seed : int
        Master seed, reduced modulo 2**64.
    stream_id : int
        Stream identifier, reduced modulo 2**64.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0, _path: tuple = ()):
        if seed < 0 or stream_id < 0:
            raise InvalidParameterError("seed and stream_id must be non-negative")
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        self.path = tuple(int(k) for k in _path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,) + self.path)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"

    def child(self, index: int) -> "RngStream":
        """Stream number ``index`` below this one; independent of the parent's state."""
        if index < 0:
            raise InvalidParameterError("child index must be non-negative")
        return RngStream(self.seed, self.stream_id, self.path + (int(index),))

    def split(self, k: int) -> list["RngStream"]:
        """Return ``k`` independent child streams."""
        if k < 1:
            raise InvalidParameterError("split count must be >= 1")
        return [self.child(i) for i in range(k)]

    # thin passthroughs
    def random(self, size=None):
        return self.generator.random(size)

    def uniform_open(self, size=None):
        """Uniforms on (0, 1]."""
        return 1.0 - self.generator.random(size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def permutation(self, n):
        return self.generator.permutation(n)


def as_stream(rng) -> RngStream:
    """Accept an RngStream or an integer seed."""
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise InvalidParameterError(f"expected RngStream or int seed, got {type(rng).__name__}")


@dataclass(frozen=True)
class OrderStatGrid:
    """Sorted uniforms with 0 and 1 appended."""

    knots: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 1 or k.size < 2:
            raise InvalidParameterError("grid needs at least two knots")
        if k[0] != 0.0 or k[-1] != 1.0 or np.any(np.diff(k) <= 0):
            raise InvalidParameterError("grid must start at 0, end at 1 and increase strictly")
        k.setflags(write=False)
        object.__setattr__(self, "knots", k)

    @property
    def n(self) -> int:
        return self.knots.size - 2


@dataclass(frozen=True)
class SimplexVector:
    """Non-negative weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidParameterError("simplex vector must be a non-empty 1-d array")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParameterError("weights must be >= 0 and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def uniform_order_stats_batch(n: int, size: int, rng: RngStream) -> np.ndarray:
    """Draw ``size`` order-statistic grids at once.

    Returns an array of shape ``(size, n + 2)`` whose rows start at 0, end at 1
    and increase strictly. Rows with floating-point ties are redrawn.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    u = np.sort(rng.random((size, n)), axis=1)
    out = np.empty((size, n + 2))
    out[:, 0] = 0.0
    out[:, -1] = 1.0
    out[:, 1:-1] = u
    bad = np.flatnonzero(np.any(np.diff(out, axis=1) <= 0, axis=1))
    tries = 0
    while bad.size:
        if tries >= _MAX_REDRAWS:
            raise SamplingError("could not draw strictly increasing order statistics")
        out[bad, 1:-1] = np.sort(rng.random((bad.size, n)), axis=1)
        bad = bad[np.any(np.diff(out[bad], axis=1) <= 0, axis=1)]
        tries += 1
    return out


def sample_uniform_order_stats(n: int, rng: RngStream) -> OrderStatGrid:
    """Sorted ``n``-sample of uniforms on (0, 1) with 0 and 1 appended."""
    return OrderStatGrid(uniform_order_stats_batch(n, 1, rng)[0])


def log_gamma_variates(shape, rng: RngStream, size=None) -> np.ndarray:
    """Logarithms of Gamma(shape, 1) variates.

    Shapes below one use ``G(a) = G(a + 1) * U**(1/a)`` evaluated as
    ``log G(a + 1) + log(U) / a`` so that tiny shapes do not underflow.
    Zero shapes give ``-inf``.
    """
    a = np.asarray(shape, dtype=float)
    if np.any(a < 0) or np.any(~np.isfinite(a)):
        raise InvalidParameterError("gamma shapes must be finite and >= 0")
    if size is None:
        size = a.shape
    a = np.broadcast_to(a, size)
    small = a < 1.0
    boost = np.where(small, a + 1.0, a)
    g = rng.generator.standard_gamma(np.where(boost > 0, boost, 1.0), size=size)
    with np.errstate(divide="ignore", over="ignore"):
        lg = np.log(g)
        if np.any(small):
            u = rng.uniform_open(size)
            lg = lg + np.where(small & (a > 0), np.log(u) / np.where(a > 0, a, 1.0), 0.0)
    return np.where(a > 0, lg, -np.inf)


def sample_gamma(shape: float, rng: RngStream) -> float:
    """One Gamma(shape, 1) variate."""
    if not shape > 0:
        raise InvalidParameterError("gamma shape must be > 0")
    return float(np.exp(log_gamma_variates(shape, rng, size=())))


def _check_dirichlet_params(params) -> np.ndarray:
    a = np.asarray(params, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise InvalidParameterError("Dirichlet parameters must be a non-empty vector")
    if np.any(~np.isfinite(a)) or np.any(a < 0):
        raise InvalidParameterError("Dirichlet parameters must be finite and >= 0")
    if not np.any(a > 0):
        raise InvalidParameterError("at least one Dirichlet parameter must be > 0")
    return a


def _normalize_log(lg: np.ndarray) -> np.ndarray:
    top = np.max(lg, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore"):
        e = np.exp(lg - top)
    return e / e.sum(axis=-1, keepdims=True)


def dirichlet_batch(params, size: int, rng: RngStream, strict: bool = False) -> np.ndarray:
    """Draw ``size`` Dirichlet vectors, shape ``(size, k)``.

    ``params`` is either one parameter vector of length ``k`` shared by all
    rows or an array of shape ``(size, k)`` with one vector per row. Rows whose
    gamma draws are all ``-inf`` in log space are redrawn a bounded number of
    times. Survivors get mass one on their largest parameter, unless
    ``strict`` is set, in which case :class:`SamplingError` is raised.
    """
    a = np.asarray(params, dtype=float)
    if a.ndim == 1:
        _check_dirichlet_params(a)
        a = np.broadcast_to(a, (size, a.size))
    else:
        if a.ndim != 2 or a.shape[0] != size or a.shape[1] == 0:
            raise InvalidParameterError("row-wise Dirichlet parameters must have shape (size, k)")
        if np.any(~np.isfinite(a)) or np.any(a < 0):
            raise InvalidParameterError("Dirichlet parameters must be finite and >= 0")
        if np.any(~np.any(a > 0, axis=1)):
            raise InvalidParameterError("each row needs at least one positive Dirichlet parameter")
    lg = log_gamma_variates(a, rng, size=a.shape)
    bad = np.flatnonzero(~np.isfinite(np.max(lg, axis=1)))
    tries = 0
    while bad.size and tries < _MAX_REDRAWS:
        lg[bad] = log_gamma_variates(a[bad], rng, size=(bad.size, a.shape[1]))
        bad = bad[~np.isfinite(np.max(lg[bad], axis=1))]
        tries += 1
    if bad.size:
        if strict:
            tiny = np.flatnonzero((a[bad[0]] > 0) & (a[bad[0]] < 1e-300))
            raise SamplingError(
                f"Dirichlet draw underflowed after {_MAX_REDRAWS} redraws; "
                f"parameter indices {tiny.tolist()} are below 1e-300"
            )
        top = np.argmax(a[bad], axis=1)
        lg[bad] = -np.inf
        lg[bad, top] = 0.0
    return _normalize_log(lg)


def sample_dirichlet(params, rng: RngStream, strict: bool = False) -> SimplexVector:
    """One Dirichlet(params) vector. Zero parameters give zero components."""
    return SimplexVector(dirichlet_batch(params, 1, rng, strict=strict)[0])


def sample_standard_normal(rng: RngStream) -> float:
    return float(rng.standard_normal())
