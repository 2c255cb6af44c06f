"""Empirical quantiles and the plug-in estimate of their asymptotic variance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .core import DegenerateDataError, DomainError, InsufficientDataError, as_float_array
from .mcse import DEFAULT_SCHEDULE, BatchSchedule, batch_size

__all__ = [
    "QuantileEstimate",
    "empirical_quantile",
    "silverman_bandwidth",
    "kde_at",
    "indicator_bm_variance",
    "quantile_variance",
]


@dataclass(frozen=True)
class QuantileEstimate:
    q: float
    xi_hat: float
    f_hat: float
    sigma2_ind: float
    gamma2_hat: float
    lambda_hat: float
    bandwidth: float


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")


def order_index(n: int, q: float) -> int:
    """``floor(n*q)`` with ``q`` taken at its shortest decimal value.

    Plain float multiplication misplaces boundary cases such as
    ``100 * 0.29 = 28.999999999999996``.
    """
    return math.floor(Fraction(repr(float(q))) * n)


def empirical_quantile(trace, q: float) -> float:
    """Inverse empirical CDF: the ``floor(n*q) + 1``-th order statistic."""
    _check_q(q)
    y = as_float_array(trace)
    n = y.shape[0]
    if n == 0:
        raise InsufficientDataError("empirical_quantile of an empty trace")
    j = order_index(n, q)
    return float(np.partition(y, j)[j])


def silverman_bandwidth(trace) -> float:
    """Silverman's rule of thumb, ``0.9 * min(s, IQR/1.34) * n**(-1/5)``.

    If one of the two spread measures is zero the other is used alone.
    """
    y = as_float_array(trace)
    n = y.shape[0]
    if n < 2:
        raise InsufficientDataError("bandwidth needs at least two observations")
    if y.min() == y.max():
        raise DegenerateDataError("all observations are equal; bandwidth undefined")
    s = float(y.std(ddof=1))
    q75, q25 = np.percentile(y, [75.0, 25.0])
    iqr = float(q75 - q25) / 1.34
    spread = min(s, iqr)
    if spread <= 0.0:
        spread = max(s, iqr)
    if not spread > 0.0:
        raise DegenerateDataError("all observations are equal; bandwidth undefined")
    return 0.9 * spread * n ** -0.2


def kde_at(trace, x: float, h: float) -> float:
    """Gaussian kernel density estimate of the trace, evaluated at ``x``."""
    if not h > 0.0:
        raise DomainError(f"bandwidth must be positive, got {h}")
    y = np.ascontiguousarray(as_float_array(trace))
    if y.shape[0] == 0:
        raise InsufficientDataError("kde_at of an empty trace")
    if not math.isfinite(x):
        return 0.0
    return float(kernels.kde_at(y, float(x), float(h)))


def indicator_bm_variance(trace, xi_hat: float, sched: BatchSchedule = DEFAULT_SCHEDULE,
                          batch: int | None = None) -> float:
    """Batch-means variance of the indicator process ``I(Y_i <= xi_hat)``."""
    y = np.ascontiguousarray(as_float_array(trace))
    n = y.shape[0]
    if n == 0:
        raise InsufficientDataError("empty trace")
    b, a = batch_size(n, sched) if batch is None else (batch, n // batch)
    if a < 2:
        raise InsufficientDataError(f"need at least 2 batches, have {a} (n={n}, b={b})")
    return max(float(kernels.indicator_bm_variance(y, float(xi_hat), b, a)), 0.0)


def quantile_variance(trace, q: float, sched: BatchSchedule = DEFAULT_SCHEDULE) -> QuantileEstimate:
    """Point estimate, asymptotic variance and scale for the q-quantile.

    The asymptotic variance is ``sigma2_ind / f_hat**2`` and the scale used by
    the relative standard deviation rule is ``sqrt(q*(1-q)) / f_hat``, both
    with ``f_hat`` a Gaussian-kernel density estimate at the sample quantile.
    """
    xi = empirical_quantile(trace, q)
    h = silverman_bandwidth(trace)
    f = kde_at(trace, xi, h)
    if not f > 0.0:
        raise DegenerateDataError(f"estimated density at the {q}-quantile is zero")
    s2 = indicator_bm_variance(trace, xi, sched)
    return QuantileEstimate(
        q=q,
        xi_hat=xi,
        f_hat=f,
        sigma2_ind=s2,
        gamma2_hat=s2 / (f * f),
        lambda_hat=math.sqrt(q * (1.0 - q)) / f,
        bandwidth=h,
    )
