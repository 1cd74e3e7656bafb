"""Posterior sampling of the NPS and Monte Carlo HPD intervals.

The HPD interval is estimated from a sorted posterior sample by the
order-statistic method of Chen and Shao (1999): with ``m = floor((1 - rho) N)``
every window ``[d[j], d[j + m]]`` holds at least a ``1 - rho`` fraction of
the draws, and the shortest one approximates the HPD interval.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConfigError, SampleTooSmallError
from .model import CredibleInterval, DirichletParams, IntervalMethod
from .rvgen import RngStream, dirichlet_variates

DEFAULT_DRAWS = 10_000
# draws per child stream; fixed so output does not depend on the thread count
CHUNK_SIZE = 1 << 16


class NpsSample:
    """Sorted Monte Carlo draws of ``delta = t3 - t1``."""

    __slots__ = ("draws",)

    def __init__(self, draws, *, assume_sorted=False):
        arr = np.array(draws, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ConfigError("an NPS sample needs at least one draw")
        if not assume_sorted:
            arr.sort()
        if not (-1.0 <= arr[0] and arr[-1] <= 1.0):
            raise ConfigError("NPS draws must lie in [-1, 1]")
        arr.setflags(write=False)
        self.draws = arr

    def __len__(self):
        return self.draws.size

    @property
    def size(self) -> int:
        return self.draws.size

    def mean(self) -> float:
        return float(self.draws.mean())

    def variance(self) -> float:
        return float(self.draws.var(ddof=1)) if self.draws.size > 1 else 0.0

    def median(self) -> float:
        return float(np.median(self.draws))


def _delta_chunk(stream: RngStream, p: DirichletParams, size: int) -> np.ndarray:
    theta = dirichlet_variates(stream, p, size)
    return theta[:, 2] - theta[:, 0]


def sample_delta(
    stream: RngStream, p: DirichletParams, n_draws: int, threads: int = 1
) -> NpsSample:
    """Draw ``theta ~ Dir(p)`` ``n_draws`` times and keep ``t3 - t1``.

    Draws are produced in fixed-size chunks, chunk ``i`` coming from
    ``stream.child(i)``; ``threads`` only changes who computes them.
    """
    if isinstance(n_draws, bool) or not isinstance(n_draws, (int, np.integer)) or n_draws < 1:
        raise ConfigError(f"n_draws must be a positive integer, got {n_draws!r}")
    sizes = [CHUNK_SIZE] * (n_draws // CHUNK_SIZE)
    if n_draws % CHUNK_SIZE:
        sizes.append(n_draws % CHUNK_SIZE)
    jobs = [(stream.child(i), size) for i, size in enumerate(sizes)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: _delta_chunk(job[0], p, job[1]), jobs))
    else:
        parts = [_delta_chunk(s, p, size) for s, size in jobs]
    draws = np.concatenate(parts)
    draws.sort()
    return NpsSample(draws, assume_sorted=True)


def _check_rho(rho):
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise ConfigError(f"rho must lie in (0, 1), got {rho}")
    return rho


def window_size(n: int, rho: float) -> int:
    """Index span ``m = floor((1 - rho) n)`` of the order-statistic windows."""
    # rounding first keeps e.g. (1 - 0.05) * 1000 from flooring to 949
    return math.floor(round((1.0 - rho) * n, 9))


def _check_size(n, rho):
    if round(rho * n, 9) < 1.0:
        raise SampleTooSmallError(
            f"{n} draws are too few for rho={rho}; need at least {math.ceil(round(1.0 / rho, 9))}"
        )


def hpd_bounds(draws: np.ndarray, rho: float) -> tuple[float, float]:
    """HPD endpoints for an already sorted 1-d array (no validation)."""
    n = draws.size
    m = window_size(n, rho)
    widths = draws[m:] - draws[: n - m]
    j = int(np.argmin(widths))  # first minimum: lowest window wins ties
    return float(draws[j]), float(draws[j + m])


def hpd_interval(sample: NpsSample, rho: float) -> CredibleInterval:
    """Shortest window holding a ``1 - rho`` share of the draws."""
    rho = _check_rho(rho)
    _check_size(sample.size, rho)
    lower, upper = hpd_bounds(sample.draws, rho)
    return CredibleInterval(lower, upper, IntervalMethod.HPD, 1.0 - rho)


def hpd_length(sample: NpsSample, rho: float) -> float:
    return hpd_interval(sample, rho).length


def equal_tailed_interval(sample: NpsSample, rho: float) -> tuple[float, float]:
    """Central interval built from the same order-statistic window size.

    Leaves about ``rho / 2`` of the draws in each tail.  Using the HPD's
    window size makes the two directly comparable.
    """
    rho = _check_rho(rho)
    _check_size(sample.size, rho)
    n = sample.size
    m = window_size(n, rho)
    j = min(math.floor(round(rho / 2.0 * n, 9)), n - 1 - m)
    return float(sample.draws[j]), float(sample.draws[j + m])
