"""Replicated coverage studies for the stopping rules."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import ExperimentConfig
from .core import (
    MEAN,
    ParameterSpec,
    RngStream,
    UnsupportedExperimentError,
    interval_contains,
)
from .samplers import Chain, make_sampler
from .stopping import StoppingResult, StoppingRule, run_sequential_many

__all__ = [
    "ParameterCoverage",
    "SettingSummary",
    "CoverageReport",
    "ReplicationOutcome",
    "true_value",
    "truths_for",
    "run_once",
    "run_replication",
    "run_replications",
    "summarize",
]


def true_value(sampler_id: str, spec: ParameterSpec, sampler_params: dict | None = None) -> float:
    """Known true value of ``spec`` under a built-in sampler's target.

    Raises
    ------
    UnsupportedExperimentError
        The sampler has no registered truth (e.g. ``generic_rw``).
    """
    return make_sampler(sampler_id, sampler_params).truth(spec)


def truths_for(config: ExperimentConfig) -> dict[str, float | None]:
    """Truth per parameter id; ``None`` where unavailable.

    Raises UnsupportedExperimentError when no parameter can be scored.
    """
    sampler = make_sampler(config.sampler, config.sampler_params)
    out = {}
    for spec in config.specs:
        try:
            out[spec.id] = float(sampler.truth(spec))
        except UnsupportedExperimentError:
            out[spec.id] = None
    if all(v is None for v in out.values()):
        raise UnsupportedExperimentError(
            f"sampler {config.sampler!r} has no true values; coverage cannot be scored")
    return out


@dataclass(frozen=True)
class ReplicationOutcome:
    """What one replication contributes to one setting."""

    n_stop: int
    capped: bool
    covered: tuple[bool | None, ...]
    region: bool | None


def run_once(config: ExperimentConfig, stream: int) -> list[StoppingResult]:
    """All settings of ``config`` applied to one trajectory on ``stream``."""
    chain = Chain(make_sampler(config.sampler, config.sampler_params), RngStream(config.seed, stream))
    return run_sequential_many(chain, config.specs, config.settings(), schedule=config.schedule)


def run_replication(config: ExperimentConfig, index: int,
                    truths: dict[str, float | None]) -> list[ReplicationOutcome]:
    outcomes = []
    for res in run_once(config, index):
        if res.capped:
            covered = tuple(None for _ in config.specs)
            region = None
        else:
            covered = tuple(None if truths[s.id] is None
                            else interval_contains(res.estimates[s.id], truths[s.id])
                            for s in config.specs)
            scored = [c for c in covered if c is not None]
            region = all(scored) if config.bonferroni and scored else None
        outcomes.append(ReplicationOutcome(res.n_stop, res.capped, covered, region))
    return outcomes


def _replicate_job(args):
    config, index, truths = args
    return run_replication(config, index, truths)


@dataclass
class ParameterCoverage:
    id: str
    kind: str
    q: float | None
    epsilon: float
    truth: float | None
    covered: int
    scored: int

    @property
    def coverage(self) -> float | None:
        return self.covered / self.scored if self.scored else None

    @property
    def coverage_se(self) -> float | None:
        p = self.coverage
        return None if p is None else math.sqrt(p * (1.0 - p) / self.scored)


@dataclass
class SettingSummary:
    rule: StoppingRule
    parameters: list[ParameterCoverage]
    replications: int
    capped: int
    mean_nstop: float | None
    sd_nstop: float | None
    region_covered: int | None = None
    region_scored: int | None = None

    @property
    def label(self) -> str:
        return self.rule.label

    @property
    def region_coverage(self) -> float | None:
        if not self.region_scored:
            return None
        return self.region_covered / self.region_scored

    @property
    def region_se(self) -> float | None:
        p = self.region_coverage
        return None if p is None else math.sqrt(p * (1.0 - p) / self.region_scored)


@dataclass
class CoverageReport:
    sampler: str
    seed: int
    replications: int
    delta: float
    overall_confidence: float | None
    settings: list[SettingSummary] = field(default_factory=list)
    # n_stop per replication and setting, kept for diagnostics; not serialized to csv
    n_stops: list[list[int]] = field(default_factory=list, repr=False)


def _mean_sd(values: list[int]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    # fsum makes both aggregates exactly invariant to replication order
    mean = math.fsum(values) / len(values)
    if len(values) < 2:
        return mean, 0.0
    return mean, math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1))


def summarize(config: ExperimentConfig, truths: dict[str, float | None],
              outcomes: list[list[ReplicationOutcome]]) -> CoverageReport:
    """Aggregate per-replication outcomes (one list per replication)."""
    settings = config.settings()
    report = CoverageReport(config.sampler, config.seed, len(outcomes), config.interval_delta,
                            config.overall_confidence)
    for k, rule in enumerate(settings):
        per_rep = [rep[k] for rep in outcomes]
        ok = [o for o in per_rep if not o.capped]
        mean, sd = _mean_sd([o.n_stop for o in ok])
        params = []
        for i, spec in enumerate(config.specs):
            truth = truths[spec.id]
            hits = [o.covered[i] for o in ok if o.covered[i] is not None]
            params.append(ParameterCoverage(spec.id, spec.kind, spec.q, rule.epsilon_for(i), truth,
                                            sum(hits), len(hits)))
        summary = SettingSummary(rule, params, len(per_rep), len(per_rep) - len(ok), mean, sd)
        if config.bonferroni:
            regions = [o.region for o in ok if o.region is not None]
            summary.region_covered, summary.region_scored = sum(regions), len(regions)
        report.settings.append(summary)
    report.n_stops = [[o.n_stop for o in rep] for rep in outcomes]
    return report


def run_replications(config: ExperimentConfig, workers: int | None = None,
                     progress=None) -> CoverageReport:
    """Replicate the experiment ``config.replications`` times and score coverage.

    Replication ``i`` (1-based) runs on stream ``i`` of ``config.seed`` and
    every setting in the config is evaluated on the same trajectory. Results
    are collected in replication order, so the report does not depend on the
    number of workers. Capped replications are counted but not scored.
    """
    truths = truths_for(config)
    workers = config.workers if workers is None else workers
    jobs = [(config, i, truths) for i in range(1, config.replications + 1)]
    if workers <= 1:
        outcomes = []
        for job in jobs:
            outcomes.append(_replicate_job(job))
            if progress is not None:
                progress(len(outcomes), len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(jobs) // (4 * workers))
            outcomes = list(pool.map(_replicate_job, jobs, chunksize=chunk))
    return summarize(config, truths, outcomes)


def describe_spec(spec: ParameterSpec) -> str:
    if spec.kind == MEAN:
        return f"E[X{spec.component + 1}]"
    return f"xi_{spec.q:g}[X{spec.component + 1}]"
