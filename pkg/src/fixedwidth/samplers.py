"""Benchmark Markov chains and a generic random-walk Metropolis sampler.

Every sampler consumes a fixed number of uniforms per iteration from an
:class:`~fixedwidth.core.RngStream`, so a trajectory depends only on the
stream and not on how the chain was advanced in chunks. Transition loops for
the built-in targets run in the kernel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._backend import kernels
from .core import (
    MEAN,
    ConfigError,
    DomainError,
    ParameterSpec,
    RngStream,
    TracePool,
    UnsupportedExperimentError,
    normal_quantile,
)

__all__ = [
    "MixtureParams",
    "ChainState",
    "Sampler",
    "ExpIndependenceSampler",
    "MixtureGibbsSampler",
    "MixtureRWSampler",
    "NormalIIDSampler",
    "ConstantSampler",
    "GenericRWSampler",
    "Chain",
    "exp_indep_accept_prob",
    "indep_metropolis_exp_step",
    "rw_metropolis_mixture_step",
    "gibbs_mixture_step",
    "rw_metropolis_generic_step",
    "gibbs_weight_x1",
    "gibbs_weight_x2",
    "mixture_logpdf",
    "mixture_cdf",
    "mixture_truth",
    "make_sampler",
    "SAMPLERS",
]


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def _std_normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@dataclass(frozen=True)
class MixtureParams:
    """Two-component bivariate normal mixture with diagonal covariances.

    Component 1 has weight ``p``, means ``(mu11, mu12)`` and SDs
    ``(sigma11, sigma12)``; component 2 has weight ``1 - p``, means
    ``(mu21, mu22)`` and SDs ``(sigma21, sigma22)``.
    """

    p: float = 0.25
    mu11: float = 1.0
    mu12: float = 10.0
    mu21: float = 2.5
    mu22: float = 25.0
    sigma11: float = 0.5
    sigma12: float = 5.0
    sigma21: float = 0.7
    sigma22: float = 7.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"mixture weight must lie in [0, 1], got {self.p}")
        for name in ("sigma11", "sigma12", "sigma21", "sigma22"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive")

    def means(self, coord: int) -> tuple[float, float]:
        return (self.mu11, self.mu21) if coord == 0 else (self.mu12, self.mu22)

    def sds(self, coord: int) -> tuple[float, float]:
        return (self.sigma11, self.sigma21) if coord == 0 else (self.sigma12, self.sigma22)

    def _gibbs_log_ratio(self, coord: int) -> float:
        # log((1-p) * sigma_1c / (p * sigma_2c)) for conditioning coordinate c
        if self.p == 0.0:
            return math.inf
        if self.p == 1.0:
            return -math.inf
        s1, s2 = self.sds(coord)
        return math.log(1.0 - self.p) + math.log(s1) - math.log(self.p) - math.log(s2)

    def gibbs_vector(self) -> np.ndarray:
        return np.array([self.mu11, self.mu12, self.mu21, self.mu22,
                         self.sigma11, self.sigma12, self.sigma21, self.sigma22,
                         self._gibbs_log_ratio(1), self._gibbs_log_ratio(0)])

    def density_vector(self) -> np.ndarray:
        lc1 = _log(self.p) - math.log(self.sigma11) - math.log(self.sigma12)
        lc2 = _log(1.0 - self.p) - math.log(self.sigma21) - math.log(self.sigma22)
        return np.array([self.mu11, self.mu12, self.mu21, self.mu22,
                         self.sigma11, self.sigma12, self.sigma21, self.sigma22, lc1, lc2])


@dataclass(frozen=True)
class ChainState:
    coordinates: tuple[float, ...]
    iteration: int = 0

    @property
    def dim(self) -> int:
        return len(self.coordinates)


def gibbs_weight_x2(x2: float, params: MixtureParams = MixtureParams()) -> float:
    """Probability that ``X1 | X2 = x2`` is drawn from component 1."""
    return float(kernels.gibbs_weight(x2, params.mu12, params.sigma12, params.mu22,
                                      params.sigma22, params._gibbs_log_ratio(1)))


def gibbs_weight_x1(x1: float, params: MixtureParams = MixtureParams()) -> float:
    """Probability that ``X2 | X1 = x1`` is drawn from component 1."""
    return float(kernels.gibbs_weight(x1, params.mu11, params.sigma11, params.mu21,
                                      params.sigma21, params._gibbs_log_ratio(0)))


def mixture_logpdf(x1: float, x2: float, params: MixtureParams = MixtureParams()) -> float:
    """Log mixture density, up to the constant ``-log(2*pi)``."""
    return float(kernels.mixture_logpdf(float(x1), float(x2), params.density_vector()))


def mixture_cdf(x: float, coord: int, params: MixtureParams = MixtureParams()) -> float:
    (m1, m2), (s1, s2) = params.means(coord), params.sds(coord)
    return params.p * _std_normal_cdf((x - m1) / s1) + (1.0 - params.p) * _std_normal_cdf((x - m2) / s2)


def mixture_truth(params: MixtureParams = MixtureParams(), q: float | None = None,
                  tol: float = 1e-10) -> tuple[float, float]:
    """Exact marginal means, or marginal q-quantiles when ``q`` is given.

    Quantiles are found by bisection on the marginal mixture CDF to ``tol``.
    """
    if q is None:
        return tuple(params.p * m1 + (1.0 - params.p) * m2
                     for m1, m2 in (params.means(0), params.means(1)))
    if not 0.0 < q < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {q}")
    out = []
    for coord in (0, 1):
        means, sds = params.means(coord), params.sds(coord)
        lo = min(m - 40.0 * s for m, s in zip(means, sds))
        hi = max(m + 40.0 * s for m, s in zip(means, sds))
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mixture_cdf(mid, coord, params) < q:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return tuple(out)


class Sampler:
    """A Markov chain driven by a fixed number of uniforms per iteration."""

    name = "sampler"
    dim = 1
    uniforms_per_step = 1

    def initial_state(self) -> np.ndarray:
        raise NotImplementedError

    def run(self, state: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Advance ``len(u)`` iterations from ``state``; returns the visited states."""
        raise NotImplementedError

    def truth(self, spec: ParameterSpec) -> float:
        raise UnsupportedExperimentError(f"no registered true values for sampler {self.name!r}")

    def step(self, state: ChainState, rng: RngStream) -> ChainState:
        u = rng.uniforms(self.uniforms_per_step).reshape(1, -1)
        row = np.atleast_2d(self.run(np.asarray(state.coordinates, dtype=np.float64), u))[0]
        return ChainState(tuple(float(v) for v in np.atleast_1d(row)), state.iteration + 1)


class ExpIndependenceSampler(Sampler):
    """Independence Metropolis for an Exp(1) target with an Exp(rate 1/2) proposal.

    The proposal has mean 2, which makes the acceptance probability
    ``min(1, exp(-(y - x)/2))``. Per iteration: one uniform for the proposal
    (inverse CDF), one for the accept test.
    """

    name = "exp_indep"
    dim = 1
    uniforms_per_step = 2

    def __init__(self, start: float = 1.0):
        if not start > 0.0:
            raise ConfigError("Exp(1) chain must start at a positive value")
        self.start = float(start)

    def initial_state(self):
        return np.array([self.start])

    def run(self, state, u):
        return kernels.exp_indep_chain(float(state[0]), np.ascontiguousarray(u)).reshape(-1, 1)

    def truth(self, spec):
        if spec.kind == MEAN:
            return 1.0
        return -math.log1p(-spec.q)


def exp_indep_accept_prob(x: float, y: float) -> float:
    """Metropolis-Hastings acceptance probability for Exp(1) target, Exp(1/2) proposal."""
    return min(1.0, math.exp(0.5 * (x - y)))


def indep_metropolis_exp_step(state: ChainState, rng: RngStream) -> ChainState:
    return ExpIndependenceSampler().step(state, rng)


class MixtureGibbsSampler(Sampler):
    """Two-block Gibbs sampler for the bivariate normal mixture.

    Each conditional is a univariate two-component normal mixture: one
    uniform picks the component, one uniform feeds the normal inverse CDF.
    """

    name = "mixture_gibbs"
    dim = 2
    uniforms_per_step = 4

    def __init__(self, params: MixtureParams | None = None, start: Sequence[float] | None = None):
        self.params = params or MixtureParams()
        self.start = tuple(start) if start is not None else mixture_truth(self.params)
        self._vec = self.params.gibbs_vector()

    def initial_state(self):
        return np.array(self.start, dtype=np.float64)

    def run(self, state, u):
        return kernels.mixture_gibbs_chain(float(state[0]), float(state[1]), self._vec,
                                           np.ascontiguousarray(u))

    def truth(self, spec):
        if spec.component > 1:
            raise UnsupportedExperimentError("mixture target has two coordinates")
        q = None if spec.kind == MEAN else spec.q
        return mixture_truth(self.params, q)[spec.component]


def gibbs_mixture_step(state: ChainState, rng: RngStream,
                       params: MixtureParams | None = None) -> ChainState:
    return MixtureGibbsSampler(params).step(state, rng)


UNIFORM_PROPOSAL = "uniform"
NORMAL_PROPOSAL = "normal"


class MixtureRWSampler(Sampler):
    """Component-wise random-walk Metropolis on the mixture, coordinate 1 then 2.

    ``uniform`` proposals are Unif(-s, s) increments, ``normal`` proposals are
    N(0, s^2) increments; default scales are 3 and 30.
    """

    dim = 2
    uniforms_per_step = 4

    def __init__(self, params: MixtureParams | None = None, proposal: str = UNIFORM_PROPOSAL,
                 scales: Sequence[float] = (3.0, 30.0), start: Sequence[float] | None = None):
        if proposal not in (UNIFORM_PROPOSAL, NORMAL_PROPOSAL):
            raise ConfigError(f"proposal must be 'uniform' or 'normal', got {proposal!r}")
        if len(scales) != 2 or min(scales) <= 0:
            raise ConfigError("random-walk scales must be two positive numbers")
        self.params = params or MixtureParams()
        self.proposal = proposal
        self.scales = tuple(float(s) for s in scales)
        self.start = tuple(start) if start is not None else mixture_truth(self.params)
        self.name = f"mixture_rw_{proposal}"
        self._vec = self.params.density_vector()

    def initial_state(self):
        return np.array(self.start, dtype=np.float64)

    def run(self, state, u):
        return kernels.mixture_rw_chain(float(state[0]), float(state[1]), self._vec,
                                        self.proposal == NORMAL_PROPOSAL,
                                        self.scales[0], self.scales[1], np.ascontiguousarray(u))

    truth = MixtureGibbsSampler.truth


def rw_metropolis_mixture_step(state: ChainState, rng: RngStream, proposal: str = UNIFORM_PROPOSAL,
                               params: MixtureParams | None = None) -> ChainState:
    scales = (3.0, 30.0)
    return MixtureRWSampler(params, proposal, scales).step(state, rng)


class NormalIIDSampler(Sampler):
    """Independent N(0, 1) draws; a chain whose CLT variance equals its variance."""

    name = "normal_iid"
    dim = 1
    uniforms_per_step = 1

    def initial_state(self):
        return np.array([0.0])

    def run(self, state, u):
        return kernels.normal_iid_chain(np.ascontiguousarray(u)).reshape(-1, 1)

    def truth(self, spec):
        return 0.0 if spec.kind == MEAN else normal_quantile(spec.q)


class ConstantSampler(Sampler):
    name = "constant"
    uniforms_per_step = 0

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def initial_state(self):
        return np.array([self.value])

    def run(self, state, u):
        return np.full((u.shape[0], 1), self.value)

    def truth(self, spec):
        return self.value


def _std_normal_logpdf(x: np.ndarray) -> float:
    return -0.5 * float(np.dot(x, x))


def _exp1_logpdf(x: np.ndarray) -> float:
    return -float(x[0]) if x[0] > 0.0 else -math.inf


# name -> (log density, default dimension)
TARGETS: dict[str, tuple[Callable[[np.ndarray], float], int]] = {
    "std_normal": (_std_normal_logpdf, 1),
    "exp1": (_exp1_logpdf, 1),
}


class GenericRWSampler(Sampler):
    """Component-wise normal random-walk Metropolis for a user log-density.

    A NaN log-density at a proposal rejects it and increments
    ``nan_proposals``. Runs in Python since the target is a Python callable.
    """

    name = "generic_rw"

    def __init__(self, log_target: Callable[[np.ndarray], float], scales: Sequence[float],
                 start: Sequence[float] | None = None):
        scales = np.asarray(scales, dtype=np.float64).ravel()
        if scales.size == 0 or np.any(~(scales > 0.0)):
            raise ConfigError("proposal scales must all be positive")
        self.log_target = log_target
        self.scales = scales
        self.dim = scales.size
        self.uniforms_per_step = 2 * self.dim
        self.start = np.zeros(self.dim) if start is None else np.asarray(start, dtype=np.float64)
        if self.start.shape != (self.dim,):
            raise ConfigError("start must have the same dimension as scales")
        self.nan_proposals = 0

    def initial_state(self):
        return self.start.copy()

    def run(self, state, u):
        x = np.array(state, dtype=np.float64)
        d = self.dim
        n = u.shape[0]
        out = np.empty((n, d))
        z = kernels.normal_from_uniforms(np.ascontiguousarray(u[:, :d]).ravel()).reshape(n, d)
        cur = float(self.log_target(x))
        for i in range(n):
            for j in range(d):
                y = x.copy()
                y[j] = x[j] + self.scales[j] * z[i, j]
                prop = float(self.log_target(y))
                if math.isnan(prop):
                    self.nan_proposals += 1
                    continue
                diff = prop - cur
                if diff >= 0.0 or (not math.isnan(diff) and u[i, d + j] < math.exp(diff)):
                    x = y
                    cur = prop
            out[i] = x
        return out


def rw_metropolis_generic_step(state: ChainState, rng: RngStream,
                               log_target: Callable[[np.ndarray], float],
                               scales: Sequence[float]) -> ChainState:
    if len(scales) != state.dim:
        raise ConfigError("scales must match the state dimension")
    return GenericRWSampler(log_target, scales).step(state, rng)


class Chain:
    """A sampler, its random stream, and the trace pool it fills.

    The initial state is recorded as the first observation.
    """

    def __init__(self, sampler: Sampler, rng: RngStream):
        self.sampler = sampler
        self.rng = rng
        self.pool = TracePool(sampler.dim)
        self._state = sampler.initial_state()
        self.pool.append(self._state.reshape(1, -1))

    def __len__(self) -> int:
        return len(self.pool)

    def extend_to(self, n: int) -> None:
        m = n - len(self.pool)
        if m <= 0:
            return
        k = self.sampler.uniforms_per_step
        u = self.rng.uniforms(m * k).reshape(m, k) if k else np.empty((m, 0))
        rows = np.asarray(self.sampler.run(self._state, u), dtype=np.float64).reshape(m, -1)
        self.pool.append(rows)
        self._state = rows[-1].copy()


SAMPLERS = ("exp_indep", "mixture_gibbs", "mixture_rw_uniform", "mixture_rw_normal",
            "normal_iid", "constant", "generic_rw")


def _floats(value, name) -> list[float]:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    try:
        return [float(v) for v in np.atleast_1d(value)]
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of numbers, got {value!r}") from None


def make_sampler(sampler_id: str, params: dict | None = None) -> Sampler:
    """Build a built-in sampler from its id and a flat parameter mapping."""
    params = dict(params or {})

    def take(key, default=None, conv=float):
        if key not in params:
            return default
        try:
            return conv(params.pop(key))
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for sampler parameter {key!r}") from None

    if sampler_id == "exp_indep":
        s = ExpIndependenceSampler(take("start", 1.0))
    elif sampler_id in ("mixture_gibbs", "mixture_rw_uniform", "mixture_rw_normal"):
        fields = {k: take(k) for k in MixtureParams.__dataclass_fields__ if k in params}
        mp = MixtureParams(**fields)
        start = params.pop("start", None)
        start = _floats(start, "start") if start is not None else None
        if sampler_id == "mixture_gibbs":
            s = MixtureGibbsSampler(mp, start)
        else:
            scales = params.pop("scales", None)
            scales = _floats(scales, "scales") if scales is not None else (3.0, 30.0)
            s = MixtureRWSampler(mp, sampler_id.rsplit("_", 1)[1], scales, start)
    elif sampler_id == "normal_iid":
        s = NormalIIDSampler()
    elif sampler_id == "constant":
        s = ConstantSampler(take("value", 0.0))
    elif sampler_id == "generic_rw":
        target = params.pop("target", "std_normal")
        if target not in TARGETS:
            raise ConfigError(f"unknown target {target!r}; choose from {sorted(TARGETS)}")
        fn, default_dim = TARGETS[target]
        dim = take("dim", default_dim, int)
        scales = params.pop("scales", None)
        scales = _floats(scales, "scales") if scales is not None else [1.0] * dim
        start = params.pop("start", None)
        if start is not None:
            start = _floats(start, "start")
        elif target == "exp1":
            start = [1.0] * len(scales)
        s = GenericRWSampler(fn, scales, start)
    else:
        raise ConfigError(f"unknown sampler {sampler_id!r}; choose from {', '.join(SAMPLERS)}")
    if params:
        raise ConfigError(f"unused parameters for sampler {sampler_id!r}: {sorted(params)}")
    return s
