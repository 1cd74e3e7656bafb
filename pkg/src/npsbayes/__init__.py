"""Bayesian estimation of the Net Promoter Score and ALC sample-size determination."""

__version__ = "0.1.0"

from .alc import AlcConfig, AlcResult, SearchStrategy, average_hpd_length, min_sample_size, predictive_draw
from .hpd import NpsSample, hpd_interval, hpd_length, sample_delta
from .model import (
    Counts,
    CredibleInterval,
    DirichletParams,
    IntervalMethod,
    NpsEstimate,
    moment_interval,
    posterior_estimate,
    posterior_mean,
    posterior_variance,
    update_posterior,
)
from .rvgen import RngStream

__all__ = [
    "AlcConfig",
    "AlcResult",
    "Counts",
    "CredibleInterval",
    "DirichletParams",
    "IntervalMethod",
    "NpsEstimate",
    "NpsSample",
    "RngStream",
    "SearchStrategy",
    "average_hpd_length",
    "hpd_interval",
    "hpd_length",
    "min_sample_size",
    "moment_interval",
    "posterior_estimate",
    "posterior_mean",
    "posterior_variance",
    "predictive_draw",
    "sample_delta",
    "update_posterior",
]
