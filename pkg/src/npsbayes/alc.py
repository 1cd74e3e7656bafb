"""Minimum sample size for estimating the NPS under the average length criterion.

For a candidate survey size ``n`` the preposterior expected HPD length is
estimated by simulation: draw ``theta`` from the prior, draw counts
``x ~ Mult(n, theta)``, update, sample ``N`` posterior NPS values and take
the HPD length; average over ``L`` replications.  The smallest ``n`` whose
average length is at most ``l_max`` is the required sample size.

Random numbers are laid out for common random numbers across ``n``.  With
root stream ``s`` and replication ``r``:

* ``s.child(0, r)``    -- prior draw of theta (shared by every ``n``)
* ``s.child(1, r, n)`` -- multinomial counts at size ``n``
* ``s.child(2, r)``    -- posterior draws (shared by every ``n``)

so the estimated curve is smooth in ``n`` and bisection over it is sound.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, NonConvergenceError
from .hpd import hpd_bounds, sample_delta
from .model import Counts, DirichletParams
from .rvgen import DEFAULT_SEED, RngStream, dirichlet_variates, multinomial_variates

DEFAULT_REPLICATIONS = 1000
DEFAULT_POSTERIOR_DRAWS = 1000
DEFAULT_N_CAP = 10**6

_THETA, _DATA, _POSTERIOR = 0, 1, 2


class SearchStrategy(str, enum.Enum):
    LINEAR_SCAN = "linear"
    BRACKET_BISECT = "bisect"


@dataclass(frozen=True)
class AlcConfig:
    l_max: float
    rho: float
    L: int = DEFAULT_REPLICATIONS
    N: int = DEFAULT_POSTERIOR_DRAWS
    seed: int = DEFAULT_SEED
    strategy: SearchStrategy = SearchStrategy.BRACKET_BISECT
    n_cap: int = DEFAULT_N_CAP

    def __post_init__(self):
        l_max, rho = float(self.l_max), float(self.rho)
        if not 0.0 < l_max <= 2.0:
            raise ConfigError(f"l_max must lie in (0, 2], got {l_max}")
        if not 0.0 < rho < 1.0:
            raise ConfigError(f"rho must lie in (0, 1), got {rho}")
        for name in ("L", "N", "n_cap"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if round(rho * self.N, 9) < 1.0:
            raise ConfigError(f"N={self.N} is too small for rho={rho}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "l_max", l_max)
        object.__setattr__(self, "rho", rho)
        try:
            object.__setattr__(self, "strategy", SearchStrategy(self.strategy))
        except ValueError:
            raise ConfigError(f"unknown search strategy {self.strategy!r}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strategy"] = self.strategy.value
        return d


@dataclass
class AlcResult:
    n_min: int
    avg_length_at_n: float
    evaluations: list = field(default_factory=list)
    config_echo: AlcConfig | None = None
    prior: DirichletParams | None = None

    def to_dict(self) -> dict:
        return {
            "n_min": self.n_min,
            "avg_length_at_n": self.avg_length_at_n,
            "prior": list(self.prior.as_tuple()) if self.prior else None,
            "config": self.config_echo.to_dict() if self.config_echo else None,
            "evaluations": [[n, avg] for n, avg in self.evaluations],
        }


def predictive_variates(stream: RngStream, prior: DirichletParams, n: int, size: int) -> np.ndarray:
    """``size`` prior-predictive count vectors as a ``(size, 3)`` integer array.

    Composition sampling realises the Dirichlet-multinomial marginal of the
    counts without ever evaluating it.
    """
    _check_n(n)
    theta = dirichlet_variates(stream.child(_THETA), prior, size)
    return multinomial_variates(stream.child(_DATA), int(n), theta)


def predictive_draw(stream: RngStream, prior: DirichletParams, n: int) -> Counts:
    """One draw from the prior predictive: theta from the prior, then counts."""
    return Counts(*(int(v) for v in predictive_variates(stream, prior, n, 1)[0]))


def _check_n(n):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ConfigError(f"sample size n must be a positive integer, got {n!r}")


def _replication_lengths(root, prior, n, rho, n_draws, reps):
    alpha = prior.as_array()
    out = np.empty(len(reps))
    for i, r in enumerate(reps):
        theta = dirichlet_variates(root.child(_THETA, r), prior, 1)[0]
        x = multinomial_variates(root.child(_DATA, r, n), n, theta)
        post = DirichletParams(*(alpha + x))
        draws = sample_delta(root.child(_POSTERIOR, r), post, n_draws).draws
        lo, hi = hpd_bounds(draws, rho)
        out[i] = hi - lo
    return out


def hpd_lengths(
    stream: RngStream, prior: DirichletParams, n: int, cfg: AlcConfig, threads: int = 1
) -> np.ndarray:
    """Per-replication HPD lengths at sample size ``n`` (length ``cfg.L``)."""
    _check_n(n)
    n = int(n)
    reps = range(cfg.L)
    if threads <= 1 or cfg.L < 2:
        return _replication_lengths(stream, prior, n, cfg.rho, cfg.N, reps)
    k = min(threads, cfg.L)
    bounds = np.linspace(0, cfg.L, k + 1).astype(int)
    chunks = [range(bounds[i], bounds[i + 1]) for i in range(k)]
    with ThreadPoolExecutor(max_workers=k) as pool:
        parts = pool.map(
            lambda reps: _replication_lengths(stream, prior, n, cfg.rho, cfg.N, reps), chunks
        )
        return np.concatenate(list(parts))


def average_hpd_length(
    stream: RngStream, prior: DirichletParams, n: int, cfg: AlcConfig, threads: int = 1
) -> float:
    """Monte Carlo estimate of the expected HPD length at sample size ``n``."""
    return float(hpd_lengths(stream, prior, n, cfg, threads).mean())


class AlcEvaluator:
    """Memoised ``n -> average HPD length`` for one prior and MC budget.

    The curve does not depend on ``l_max``, so one evaluator can serve
    searches at several ``l_max`` values (table columns).
    """

    def __init__(self, prior: DirichletParams, cfg: AlcConfig, threads: int = 1):
        self.prior = prior
        self.cfg = cfg
        self.threads = threads
        self.root = RngStream(cfg.seed)
        self.cache: dict[int, float] = {}

    def key(self):
        c = self.cfg
        return (self.prior, c.rho, c.L, c.N, c.seed)

    def __call__(self, n: int) -> float:
        if n not in self.cache:
            self.cache[n] = average_hpd_length(self.root, self.prior, n, self.cfg, self.threads)
        return self.cache[n]


def min_sample_size(
    prior: DirichletParams,
    cfg: AlcConfig,
    threads: int = 1,
    evaluator: AlcEvaluator | None = None,
) -> AlcResult:
    """Smallest ``n`` whose average HPD length is at most ``cfg.l_max``.

    ``LinearScan`` walks ``n = 1, 2, ...``.  ``BracketBisect`` doubles ``n``
    until the criterion holds, bisects the bracket, then walks down while
    the criterion still holds.  Raises :class:`NonConvergenceError` past
    ``cfg.n_cap``.
    """
    if evaluator is None:
        evaluator = AlcEvaluator(prior, cfg, threads)
    elif evaluator.key() != (prior, cfg.rho, cfg.L, cfg.N, cfg.seed):
        raise ConfigError("evaluator was built for a different prior or Monte Carlo budget")

    trace: dict[int, float] = {}

    def f(n):
        if n not in trace:
            trace[n] = evaluator(n)
        return trace[n]

    def ok(n):
        return f(n) <= cfg.l_max

    def fail():
        raise NonConvergenceError(
            f"criterion l_max={cfg.l_max} not met for n <= {cfg.n_cap}",
            evaluations=list(trace.items()),
        )

    if cfg.strategy is SearchStrategy.LINEAR_SCAN:
        n = 1
        while not ok(n):
            n += 1
            if n > cfg.n_cap:
                fail()
    else:
        lo, hi = 0, 1
        while not ok(hi):
            if hi >= cfg.n_cap:
                fail()
            lo, hi = hi, min(2 * hi, cfg.n_cap)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        n = hi
        while n > 1 and ok(n - 1):
            n -= 1

    return AlcResult(n, trace[n], list(trace.items()), cfg, prior)
