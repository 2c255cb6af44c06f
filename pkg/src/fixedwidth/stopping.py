"""Sequential fixed-width stopping rules.

Three rules share one inequality, ``2 * half_width + p(n) <= threshold``:

* ``absolute``  -- threshold ``eps``
* ``relmag``    -- threshold ``eps * |point|``
* ``relsd``     -- threshold ``eps * lambda_hat`` (target standard deviation)

with penalty ``p(n) = eps * [n < n_star] + 1/n``. Estimates are recomputed
from the full stored trace at every check because the batch size and kernel
bandwidth both move with ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    MEAN,
    ConfigError,
    DomainError,
    EstimationError,
    IntervalEstimate,
    ParameterSpec,
    RngStream,
    check_unique_ids,
)
from .mcse import DEFAULT_SCHEDULE, BatchSchedule, bm_variance, mean_estimate
from .quantile import quantile_variance
from .samplers import Chain, Sampler

__all__ = [
    "ABSOLUTE",
    "RELMAG",
    "RELSD",
    "RULE_KINDS",
    "StoppingRule",
    "StoppingResult",
    "penalty",
    "threshold",
    "criterion_met",
    "bonferroni_delta",
    "estimate",
    "run_sequential",
    "run_sequential_many",
]

ABSOLUTE = "absolute"
RELMAG = "relmag"
RELSD = "relsd"
RULE_KINDS = (ABSOLUTE, RELMAG, RELSD)

_RULE_LABELS = {ABSOLUTE: "T1", RELMAG: "T2", RELSD: "T3"}
_ALIASES = {"t1": ABSOLUTE, "t2": RELMAG, "t3": RELSD,
            "relative_magnitude": RELMAG, "relative_sd": RELSD}


def parse_rule_kind(text: str) -> str:
    key = text.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in RULE_KINDS:
        raise ConfigError(f"unknown rule {text!r}; use absolute, relmag or relsd (or T1/T2/T3)")
    return key


@dataclass(frozen=True)
class StoppingRule:
    """Rule family plus tolerance, per-interval ``delta`` and check schedule.

    ``epsilon`` is either one value for every parameter or a tuple with one
    entry per parameter, in the order the parameters are given.
    """

    kind: str
    epsilon: float | tuple[float, ...]
    delta: float = 0.10
    n_star: int = 1000
    check_increment: int = 500
    max_iterations: int = 10_000_000

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise DomainError(f"unknown rule kind {self.kind!r}")
        eps = self.epsilon
        if isinstance(eps, (list, tuple, np.ndarray)):
            eps = tuple(float(e) for e in eps)
            object.__setattr__(self, "epsilon", eps)
            values = eps
        else:
            object.__setattr__(self, "epsilon", float(eps))
            values = (float(eps),)
        if not values or min(values) <= 0.0:
            raise DomainError("epsilon must be positive")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.n_star < 1:
            raise DomainError("n_star must be >= 1")
        if self.check_increment < 1:
            raise DomainError("check_increment must be >= 1")
        if self.max_iterations < self.n_star:
            raise DomainError("max_iterations must be >= n_star")

    @property
    def label(self) -> str:
        eps = self.epsilon
        text = f"{eps:g}" if isinstance(eps, float) else "vec"
        return f"{_RULE_LABELS[self.kind]}({text})"

    def epsilon_for(self, index: int) -> float:
        if isinstance(self.epsilon, tuple):
            return self.epsilon[index]
        return self.epsilon

    def check_points(self):
        n = self.n_star
        while n <= self.max_iterations:
            yield n
            n += self.check_increment


@dataclass
class StoppingResult:
    n_stop: int
    estimates: dict[str, IntervalEstimate | None]
    rule: StoppingRule
    capped: bool = False
    checks: int = 0


def penalty(n: int, epsilon: float, n_star: int) -> float:
    """``epsilon * [n < n_star] + 1/n``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return (epsilon if n < n_star else 0.0) + 1.0 / n


def threshold(rule: StoppingRule, est: IntervalEstimate, epsilon: float | None = None) -> float:
    eps = rule.epsilon_for(0) if epsilon is None else epsilon
    if rule.kind == ABSOLUTE:
        return eps
    if rule.kind == RELMAG:
        return eps * abs(est.point)
    return eps * est.lambda_hat


def criterion_met(rule: StoppingRule, est: IntervalEstimate, epsilon: float | None = None) -> bool:
    eps = rule.epsilon_for(0) if epsilon is None else epsilon
    return 2.0 * est.half_width + penalty(est.n, eps, rule.n_star) <= threshold(rule, est, eps)


def bonferroni_delta(overall_confidence: float, k: int) -> float:
    """Per-interval ``delta`` so that ``k`` intervals jointly reach ``overall_confidence``."""
    if k < 1:
        raise DomainError(f"number of intervals must be >= 1, got {k}")
    if not 0.0 < overall_confidence < 1.0:
        raise DomainError(f"overall confidence must lie in (0, 1), got {overall_confidence}")
    return 1.0 - overall_confidence ** (1.0 / k)


def point_scale_sigma(spec: ParameterSpec, trace: np.ndarray,
                      sched: BatchSchedule = DEFAULT_SCHEDULE) -> tuple[float, float, float]:
    """``(point, lambda_hat, sigma_hat)`` for one parameter from its trace."""
    if spec.kind == MEAN:
        point, lam = mean_estimate(trace)
        return point, lam, math.sqrt(bm_variance(trace, sched))
    qe = quantile_variance(trace, spec.q, sched)
    return qe.xi_hat, qe.lambda_hat, math.sqrt(qe.gamma2_hat)


def estimate(spec: ParameterSpec, trace: np.ndarray, delta: float,
             sched: BatchSchedule = DEFAULT_SCHEDULE) -> IntervalEstimate:
    point, lam, sigma = point_scale_sigma(spec, trace, sched)
    return IntervalEstimate.build(len(trace), point, sigma, lam, delta)


# (spec, trace, delta, schedule) -> IntervalEstimate
Estimator = Callable[[ParameterSpec, np.ndarray, float, BatchSchedule], IntervalEstimate]


def run_sequential(sampler: Sampler, specs: Sequence[ParameterSpec], rule: StoppingRule,
                   rng: RngStream, *, schedule: BatchSchedule = DEFAULT_SCHEDULE,
                   estimator: Estimator | None = None) -> StoppingResult:
    """Run one chain until every parameter meets ``rule`` at the same check.

    The chain is advanced to ``rule.n_star`` and then by
    ``rule.check_increment`` between checks. Estimation failures at a check
    (too few batches, degenerate data) count as the criterion not being met.
    If no check up to ``rule.max_iterations`` succeeds the result is capped.
    """
    return run_sequential_many(Chain(sampler, rng), specs, [rule],
                               schedule=schedule, estimator=estimator)[0]


def run_sequential_many(chain: Chain, specs: Sequence[ParameterSpec], rules: Sequence[StoppingRule],
                        *, schedule: BatchSchedule = DEFAULT_SCHEDULE,
                        estimator: Estimator | None = None) -> list[StoppingResult]:
    """Apply several rules to the same trajectory.

    The chain is only ever extended, so each rule sees the same draws it would
    have seen running alone. Per-parameter estimates that do not depend on the
    rule are shared between rules checking at the same ``n``.
    """
    specs = list(specs)
    if not specs:
        raise ConfigError("at least one parameter is required")
    check_unique_ids(specs)
    for rule in rules:
        if isinstance(rule.epsilon, tuple) and len(rule.epsilon) != len(specs):
            raise ConfigError(f"epsilon vector has {len(rule.epsilon)} entries for {len(specs)} parameters")
    cache: dict[tuple[str, int], tuple[float, float, float] | None] = {}

    def estimate_at(spec, n, delta):
        trace = chain.pool.trace(spec, n)
        if estimator is not None:
            try:
                return estimator(spec, trace, delta, schedule)
            except EstimationError:
                return None
        key = (spec.id, n)
        if key not in cache:
            try:
                cache[key] = point_scale_sigma(spec, trace, schedule)
            except EstimationError:
                cache[key] = None
        got = cache[key]
        if got is None:
            return None
        point, lam, sigma = got
        return IntervalEstimate.build(n, point, sigma, lam, delta)

    results = []
    for rule in rules:
        last_n, last_est, checks = None, None, 0
        for n in rule.check_points():
            chain.extend_to(n)
            checks += 1
            ests = {s.id: estimate_at(s, n, rule.delta) for s in specs}
            last_n, last_est = n, ests
            if all(e is not None and criterion_met(rule, e, rule.epsilon_for(i))
                   for i, e in enumerate(ests[s.id] for s in specs)):
                results.append(StoppingResult(n, ests, rule, capped=False, checks=checks))
                break
        else:
            results.append(StoppingResult(last_n, last_est, rule, capped=True, checks=checks))
    return results
