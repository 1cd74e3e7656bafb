"""Multinomial/Dirichlet model for the Net Promoter Score.

Respondents fall into three categories (detractors, passives, promoters)
with population proportions ``theta = (t1, t2, t3)``.  The NPS is
``delta = t3 - t1``.  With a ``Dir(a1, a2, a3)`` prior and multinomial
counts ``(x1, x2, x3)`` the posterior is ``Dir(a1 + x1, a2 + x2, a3 + x3)``,
so sequential survey waves are handled by feeding each posterior back in as
the next prior.

Closed forms used here, with ``a0 = a1 + a2 + a3``::

    E[delta]   = (a3 - a1) / a0
    Var[delta] = (a1*a2 + a2*a3 + 4*a1*a3) / (a0**2 * (a0 + 1))
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError


def _as_count(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DataError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < 0:
        raise DataError(f"{name} must be >= 0, got {value}")
    return value


@dataclass(frozen=True)
class Counts:
    """Detractor, passive and promoter tallies from one survey batch."""

    x1: int
    x2: int
    x3: int

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            object.__setattr__(self, name, _as_count(getattr(self, name), name))

    @classmethod
    def from_sequence(cls, values) -> Counts:
        values = list(values)
        if len(values) != 3:
            raise DataError(f"expected 3 counts, got {len(values)}")
        return cls(*values)

    @property
    def n(self) -> int:
        return self.x1 + self.x2 + self.x3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x1, self.x2, self.x3)

    def __add__(self, other: Counts) -> Counts:
        if not isinstance(other, Counts):
            return NotImplemented
        return Counts(self.x1 + other.x1, self.x2 + other.x2, self.x3 + other.x3)


@dataclass(frozen=True)
class DirichletParams:
    """Positive concentration vector; used for priors, posteriors and saved state."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        for name in ("a1", "a2", "a3"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise ConfigError(f"{name} must be a real number, got {value!r}")
            value = float(value)
            if not math.isfinite(value) or value <= 0.0:
                raise ConfigError(f"{name} must be finite and > 0, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_sequence(cls, values) -> DirichletParams:
        values = list(values)
        if len(values) != 3:
            raise ConfigError(f"expected 3 concentration parameters, got {len(values)}")
        return cls(*values)

    @property
    def a0(self) -> float:
        return self.a1 + self.a2 + self.a3

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)

    def mirrored(self) -> DirichletParams:
        """Swap the detractor and promoter concentrations."""
        return DirichletParams(self.a3, self.a2, self.a1)


@dataclass(frozen=True)
class NpsEstimate:
    mean: float
    variance: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


class IntervalMethod(str, enum.Enum):
    MOMENT = "moment"
    HPD = "hpd"


@dataclass(frozen=True)
class CredibleInterval:
    """Interval estimate of the NPS.

    ``level_or_gamma`` holds the multiplier for moment intervals and the
    credible level ``1 - rho`` for HPD intervals.  ``clipped`` records
    whether an endpoint was pulled back into ``[-1, 1]``.
    """

    lower: float
    upper: float
    method: IntervalMethod
    level_or_gamma: float
    clipped: bool = False

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"lower ({self.lower}) exceeds upper ({self.upper})")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "level_or_gamma": self.level_or_gamma,
            "lower": self.lower,
            "upper": self.upper,
            "length": self.length,
            "clipped": self.clipped,
        }


def update_posterior(prior: DirichletParams, data: Counts) -> DirichletParams:
    """Conjugate update: add the observed counts to the concentrations."""
    return DirichletParams(prior.a1 + data.x1, prior.a2 + data.x2, prior.a3 + data.x3)


def posterior_mean(p: DirichletParams) -> float:
    return (p.a3 - p.a1) / p.a0


def posterior_variance(p: DirichletParams) -> float:
    a0 = p.a0
    return (p.a1 * p.a2 + p.a2 * p.a3 + 4.0 * p.a1 * p.a3) / (a0 * a0 * (a0 + 1.0))


def posterior_estimate(p: DirichletParams) -> NpsEstimate:
    return NpsEstimate(posterior_mean(p), posterior_variance(p))


def moment_interval(p: DirichletParams, gamma: float) -> CredibleInterval:
    """``mean +/- gamma * sd`` from the closed forms, clipped to ``[-1, 1]``."""
    gamma = float(gamma)
    if not math.isfinite(gamma) or gamma < 0.0:
        raise ConfigError(f"gamma must be finite and >= 0, got {gamma}")
    mean = posterior_mean(p)
    half = gamma * math.sqrt(posterior_variance(p))
    lower, upper = mean - half, mean + half
    clipped = lower < -1.0 or upper > 1.0
    return CredibleInterval(
        max(lower, -1.0), min(upper, 1.0), IntervalMethod.MOMENT, gamma, clipped
    )
