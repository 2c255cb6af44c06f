"""Shared domain types, the standard normal quantile, and interval helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FixedWidthError",
    "DomainError",
    "EstimationError",
    "InsufficientDataError",
    "DegenerateDataError",
    "ConfigError",
    "UnsupportedExperimentError",
    "MEAN",
    "QUANTILE",
    "ParameterSpec",
    "TracePool",
    "IntervalEstimate",
    "RngStream",
    "normal_quantile",
    "halfwidth",
    "interval_contains",
]


class FixedWidthError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FixedWidthError, ValueError):
    """An argument lies outside the domain of the function."""


class EstimationError(FixedWidthError):
    """An estimator cannot produce a value from the data it was given."""


class InsufficientDataError(EstimationError):
    pass


class DegenerateDataError(EstimationError):
    pass


class ConfigError(FixedWidthError):
    pass


class UnsupportedExperimentError(FixedWidthError):
    pass


MEAN = "mean"
QUANTILE = "quantile"


@dataclass(frozen=True)
class ParameterSpec:
    """A feature of the target to estimate.

    ``component`` selects the coordinate of the chain state whose values feed
    the estimator; ``q`` is only meaningful for quantile parameters.
    """

    id: str
    kind: str = MEAN
    q: float | None = None
    component: int = 0

    def __post_init__(self):
        if self.kind not in (MEAN, QUANTILE):
            raise DomainError(f"unknown parameter kind {self.kind!r}")
        if self.kind == QUANTILE:
            if self.q is None or not 0.0 < self.q < 1.0:
                raise DomainError(f"quantile level must lie in (0, 1), got {self.q!r}")
        elif self.q is not None:
            raise DomainError("q is only valid for quantile parameters")
        if self.component < 0:
            raise DomainError(f"component index must be >= 0, got {self.component}")

    @classmethod
    def mean(cls, id: str, component: int = 0) -> "ParameterSpec":
        return cls(id, MEAN, None, component)

    @classmethod
    def quantile(cls, id: str, q: float, component: int = 0) -> "ParameterSpec":
        return cls(id, QUANTILE, float(q), component)


def check_unique_ids(specs: Iterable[ParameterSpec]) -> None:
    seen = set()
    for spec in specs:
        if spec.id in seen:
            raise ConfigError(f"duplicate parameter id {spec.id!r}")
        seen.add(spec.id)


class TracePool:
    """Append-only store of the scalar functionals observed along one chain.

    Values are kept per chain coordinate; parameters that read the same
    coordinate share storage. Rows below ``len(pool)`` never change, so a
    ``trace()`` view taken at length n stays valid after later appends.
    """

    def __init__(self, dim: int, capacity: int = 4096):
        if dim < 1:
            raise DomainError("dimension must be >= 1")
        self.dim = dim
        self._data = np.empty((max(capacity, 16), dim), dtype=np.float64)
        self._n = 0

    def __len__(self) -> int:
        return self._n

    def append(self, rows) -> None:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows.reshape(-1, self.dim)
        if rows.shape[1] != self.dim:
            raise DomainError(f"expected rows of width {self.dim}, got {rows.shape[1]}")
        m = rows.shape[0]
        need = self._n + m
        if need > self._data.shape[0]:
            cap = self._data.shape[0]
            while cap < need:
                cap *= 2
            # copy instead of resizing in place so that outstanding views stay valid
            grown = np.empty((cap, self.dim), dtype=np.float64)
            grown[: self._n] = self._data[: self._n]
            self._data = grown
        self._data[self._n : need] = rows
        self._n = need

    def column(self, component: int, n: int | None = None) -> np.ndarray:
        if not 0 <= component < self.dim:
            raise DomainError(f"component {component} out of range for dimension {self.dim}")
        n = self._n if n is None else n
        if n > self._n:
            raise DomainError(f"requested prefix of length {n} but pool holds {self._n}")
        view = self._data[:n, component]
        view.flags.writeable = False
        return view

    def trace(self, spec: ParameterSpec, n: int | None = None) -> np.ndarray:
        return self.column(spec.component, n)


def normal_quantile(p: float) -> float:
    """Inverse of the standard normal CDF.

    Wichura's AS241 (PPND16) rational approximation, accurate to about 1e-16
    relative error over the open unit interval.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal_quantile requires 0 < p < 1, got {p!r}")
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


def halfwidth(sigma_hat: float, n: int, delta: float) -> float:
    """Half the width of the ``1 - delta`` normal interval, ``z * sigma_hat / sqrt(n)``."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    if sigma_hat < 0:
        raise DomainError(f"sigma_hat must be >= 0, got {sigma_hat}")
    return normal_quantile(1.0 - delta / 2.0) * sigma_hat / math.sqrt(n)


@dataclass(frozen=True)
class IntervalEstimate:
    n: int
    point: float
    sigma_hat: float
    lambda_hat: float
    half_width: float
    delta: float

    @classmethod
    def build(cls, n: int, point: float, sigma_hat: float, lambda_hat: float,
              delta: float) -> "IntervalEstimate":
        return cls(n, float(point), float(sigma_hat), float(lambda_hat),
                   halfwidth(sigma_hat, n, delta), delta)

    @property
    def mcse(self) -> float:
        return self.sigma_hat / math.sqrt(self.n)

    @property
    def width(self) -> float:
        return 2.0 * self.half_width

    def with_overrides(self, **kw) -> "IntervalEstimate":
        return replace(self, **kw)


def interval_contains(est: IntervalEstimate, truth: float) -> bool:
    """True iff ``truth`` lies strictly inside ``point -/+ half_width``."""
    return abs(est.point - truth) < est.half_width


_MASK64 = (1 << 64) - 1


@dataclass
class RngStream:
    """Seekable stream of uniform(0, 1) doubles.

    Backed by the Philox4x64 counter-based generator keyed on
    ``(seed, stream)``, so each replication index gets its own independent
    stream and any position can be reached without drawing the values before
    it. All randomness in the package is derived from these uniforms.
    """

    seed: int
    stream: int = 0
    _position: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.stream <= _MASK64:
            raise DomainError("stream id must be a 64-bit unsigned integer")
        self.seek(0)

    @property
    def position(self) -> int:
        """Number of uniforms consumed so far."""
        return self._position

    def seek(self, position: int) -> None:
        if position < 0:
            raise DomainError("stream position must be >= 0")
        block, offset = divmod(position, 4)
        counter = np.array([(block >> (64 * i)) & _MASK64 for i in range(4)], dtype=np.uint64)
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
        if offset:
            self._gen.random(offset)
        self._position = position

    def uniforms(self, k: int) -> np.ndarray:
        out = self._gen.random(k)
        self._position += k
        return out

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def spawn(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)


def as_float_array(trace: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(trace, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError("trace must be one-dimensional")
    return arr
