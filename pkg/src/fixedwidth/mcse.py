"""Batch-means Monte Carlo standard errors for ergodic averages."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .core import DomainError, InsufficientDataError, as_float_array

__all__ = ["FLOOR_POW", "POWER_OF_TWO", "BatchSchedule", "batch_size", "mean_estimate", "bm_variance"]

FLOOR_POW = "floor_pow"
POWER_OF_TWO = "power_of_two"


@dataclass(frozen=True)
class BatchSchedule:
    """How batch size grows with chain length.

    ``floor_pow`` uses ``b_n = floor(n**tau)``; ``power_of_two`` rounds that
    down to a power of two so a stored chain only ever needs pairwise batch
    merges. Strong consistency of the batch-means estimator needs
    ``(1 + eps1/2)**-1 < tau < 1`` for the moment condition at hand; any tau
    in (0, 1) is accepted here and that band is left to the caller.
    """

    tau: float = 0.5
    mode: str = FLOOR_POW

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")
        if self.mode not in (FLOOR_POW, POWER_OF_TWO):
            raise DomainError(f"unknown batch schedule mode {self.mode!r}")


DEFAULT_SCHEDULE = BatchSchedule()


def _floor_pow(n: int, tau: float) -> int:
    # relative nudge so exact integer roots (e.g. 1000**(1/3)) are not floored down
    return max(int(math.floor(n ** tau * (1.0 + 1e-12))), 1)


def batch_size(n: int, sched: BatchSchedule = DEFAULT_SCHEDULE) -> tuple[int, int]:
    """Return ``(b_n, a_n)``: batch length and number of complete batches."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if sched.tau == 0.5:
        b = max(math.isqrt(n), 1)
    else:
        b = _floor_pow(n, sched.tau)
    if sched.mode == POWER_OF_TWO:
        b = 1 << (b.bit_length() - 1)
    return b, n // b


def mean_estimate(trace) -> tuple[float, float]:
    """Ergodic average and sample standard deviation (ddof=1) of a trace."""
    y = as_float_array(trace)
    if y.shape[0] < 2:
        raise InsufficientDataError("mean_estimate needs at least two observations")
    return float(y.mean()), float(y.std(ddof=1))


def bm_variance(trace, sched: BatchSchedule = DEFAULT_SCHEDULE, batch: int | None = None) -> float:
    """Non-overlapping batch-means estimate of the CLT variance of the mean.

    Parameters
    ----------
    trace : array_like
        Observed functional values ``g(X_0), ..., g(X_{n-1})``.
    sched : BatchSchedule
        Batch-size schedule used when ``batch`` is not given.
    batch : int, optional
        Force a batch length instead of following the schedule.

    Returns
    -------
    float
        ``b/(a-1) * sum_j (Ybar_j - gbar)**2`` with batches over the first
        ``a*b`` observations and ``gbar`` the mean of all ``n`` observations.

    Raises
    ------
    InsufficientDataError
        Fewer than two complete batches.
    """
    y = np.ascontiguousarray(as_float_array(trace))
    n = y.shape[0]
    if n == 0:
        raise InsufficientDataError("empty trace")
    if batch is None:
        b, a = batch_size(n, sched)
    else:
        if batch < 1:
            raise DomainError(f"batch length must be >= 1, got {batch}")
        b, a = batch, n // batch
    if a < 2:
        raise InsufficientDataError(f"need at least 2 batches, have {a} (n={n}, b={b})")
    return max(float(kernels.bm_variance(y, b, a)), 0.0)
