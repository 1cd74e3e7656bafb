"""Seedable random variate generation.

Every Monte Carlo routine in the package draws from an :class:`RngStream`.
A stream is identified by ``(seed, stream_id)`` plus an optional path of
integer child keys; it wraps a Philox counter-based bit generator seeded
through :class:`numpy.random.SeedSequence` with
``spawn_key = (stream_id, *path)``.  Child streams are therefore cheap,
collision free and independent of how work is split across threads.

Samplers:

* gamma: Marsaglia-Tsang squeeze/rejection for shape >= 1, and the boost
  ``G(a) = G(a + 1) * U**(1/a)`` for shape < 1;
* Dirichlet: normalised independent gammas (log space when any
  concentration is below one, so tiny shapes do not underflow to 0/0);
* multinomial: conditional binomial decomposition, O(1) per category.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import Counts, DirichletParams

DEFAULT_SEED = 20210401
_U64 = 2**64


def _check_u64(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if not 0 <= value < _U64:
        raise ConfigError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


class RngStream:
    """A reproducible random stream owned by a single worker.

    Two streams built from the same ``(seed, stream_id, path)`` emit
    bit-identical sequences for the same sequence of calls.
    """

    __slots__ = ("seed", "stream_id", "path", "_gen")

    def __init__(self, seed: int = DEFAULT_SEED, stream_id: int = 0, path: tuple = ()):
        self.seed = _check_u64(seed, "seed")
        self.stream_id = _check_u64(stream_id, "stream_id")
        self.path = tuple(_check_u64(k, "child key") for k in path)
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def child(self, *keys: int) -> RngStream:
        """Independent sub-stream addressed by integer keys (fresh state)."""
        return RngStream(self.seed, self.stream_id, self.path + keys)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"


@dataclass(frozen=True)
class Proportions:
    """Category proportions on the probability simplex."""

    t1: float
    t2: float
    t3: float

    def __post_init__(self):
        vals = (float(self.t1), float(self.t2), float(self.t3))
        # exact zeros are tolerated: they only arise from underflow at tiny concentrations
        if any(not math.isfinite(v) or v < 0.0 or v > 1.0 for v in vals):
            raise ConfigError(f"proportions must lie in [0, 1], got {vals}")
        if abs(math.fsum(vals) - 1.0) > 1e-12:
            raise ConfigError(f"proportions must sum to 1, got sum {math.fsum(vals)!r}")
        for name, v in zip(("t1", "t2", "t3"), vals):
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3], dtype=np.float64)


def _marsaglia_tsang(gen: np.random.Generator, shape: np.ndarray) -> np.ndarray:
    """Gamma(shape, 1) variates for an array of shapes, all >= 1."""
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty_like(d)
    pending = np.arange(d.size)
    dd, cc = d, c
    while pending.size:
        x = gen.standard_normal(pending.size)
        u = gen.random(pending.size)
        v = 1.0 + cc * x
        positive = v > 0.0
        v = np.where(positive, v, 1.0) ** 3
        x2 = x * x
        squeeze = u < 1.0 - 0.0331 * x2 * x2
        with np.errstate(divide="ignore"):
            full = np.log(u) < 0.5 * x2 + dd * (1.0 - v + np.log(v))
        accept = positive & (squeeze | full)
        out[pending[accept]] = dd[accept] * v[accept]
        reject = ~accept
        pending, dd, cc = pending[reject], dd[reject], cc[reject]
    return out


def _log_gamma_variates(gen: np.random.Generator, shape: np.ndarray) -> np.ndarray:
    """log of Gamma(shape, 1) variates; safe for arbitrarily small shapes."""
    small = shape < 1.0
    g = _marsaglia_tsang(gen, np.where(small, shape + 1.0, shape))
    logs = np.log(g)
    if small.any():
        u = gen.random(int(small.sum()))
        with np.errstate(divide="ignore"):
            logs[small] += np.log(u) / shape[small]
    return logs


def _check_shape(shape) -> np.ndarray:
    arr = np.asarray(shape, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ConfigError(f"gamma shape must be finite and > 0, got {shape!r}")
    return arr


def gamma_variates(stream: RngStream, shape, size=None) -> np.ndarray:
    """Vectorised Gamma(shape, scale=1) draws.

    ``shape`` may be a scalar or an array; ``size`` broadcasts like numpy.
    """
    shape = _check_shape(shape)
    if size is not None:
        shape = np.broadcast_to(shape, size)
    flat = np.ascontiguousarray(shape, dtype=np.float64).ravel()
    gen = stream.generator
    small = flat < 1.0
    g = _marsaglia_tsang(gen, np.where(small, flat + 1.0, flat))
    if small.any():
        u = gen.random(int(small.sum()))
        g[small] *= u ** (1.0 / flat[small])
    return g.reshape(shape.shape)


def gamma_draw(stream: RngStream, shape: float) -> float:
    """One Gamma(shape, 1) variate."""
    return float(gamma_variates(stream, float(shape), size=1)[0])


def dirichlet_variates(stream: RngStream, p: DirichletParams, size: int) -> np.ndarray:
    """``size`` draws from Dir(p) as a ``(size, 3)`` array of row proportions."""
    alpha = p.as_array()
    shapes = np.tile(alpha, size)
    gen = stream.generator
    if alpha.min() >= 1.0:
        g = _marsaglia_tsang(gen, shapes).reshape(size, 3)
        return g / g.sum(axis=1, keepdims=True)
    logs = _log_gamma_variates(gen, shapes).reshape(size, 3)
    logs -= logs.max(axis=1, keepdims=True)
    w = np.exp(logs)
    return w / w.sum(axis=1, keepdims=True)


def dirichlet_draw(stream: RngStream, p: DirichletParams) -> Proportions:
    t = dirichlet_variates(stream, p, 1)[0]
    return Proportions(*t)


def multinomial_variates(stream: RngStream, n, theta) -> np.ndarray:
    """Multinomial draws by conditional binomials.

    ``theta`` is ``(3,)`` or ``(k, 3)``; ``n`` is a scalar or broadcasts
    against the rows.  Returns integer counts of shape ``(..., 3)``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    n = np.asarray(n, dtype=np.int64)
    gen = stream.generator
    t1, t2, t3 = theta[..., 0], theta[..., 1], theta[..., 2]
    p1 = np.clip(t1 / (t1 + t2 + t3), 0.0, 1.0)
    x1 = gen.binomial(n, p1)
    rest = t2 + t3
    with np.errstate(divide="ignore", invalid="ignore"):
        p2 = np.where(rest > 0.0, t2 / rest, 0.0)
    x2 = gen.binomial(n - x1, np.clip(p2, 0.0, 1.0))
    x3 = n - x1 - x2
    return np.stack(np.broadcast_arrays(x1, x2, x3), axis=-1).astype(np.int64)


def multinomial_draw(stream: RngStream, n: int, theta: Proportions) -> Counts:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ConfigError(f"n must be a positive integer, got {n!r}")
    x = multinomial_variates(stream, int(n), theta.as_array())
    return Counts(*(int(v) for v in x))
