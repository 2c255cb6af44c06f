"""Fixed-width sequential stopping rules for Markov chain Monte Carlo.

Absolute, relative-magnitude and relative-standard-deviation stopping rules
with batch-means standard errors for means and quantiles, benchmark samplers,
and a replication harness for coverage studies.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .core import (
    ConfigError,
    DegenerateDataError,
    DomainError,
    FixedWidthError,
    InsufficientDataError,
    IntervalEstimate,
    ParameterSpec,
    RngStream,
    TracePool,
    UnsupportedExperimentError,
    halfwidth,
    interval_contains,
    normal_quantile,
)
from .mcse import BatchSchedule, batch_size, bm_variance, mean_estimate
from .quantile import (
    QuantileEstimate,
    empirical_quantile,
    indicator_bm_variance,
    kde_at,
    quantile_variance,
    silverman_bandwidth,
)
from .stopping import (
    StoppingResult,
    StoppingRule,
    bonferroni_delta,
    criterion_met,
    penalty,
    run_sequential,
    threshold,
)
