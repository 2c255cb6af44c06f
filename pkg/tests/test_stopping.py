import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixedwidth.core import (
    ConfigError,
    DomainError,
    InsufficientDataError,
    IntervalEstimate,
    ParameterSpec,
    RngStream,
    interval_contains,
    normal_quantile,
)
from fixedwidth.samplers import Chain, ConstantSampler, ExpIndependenceSampler, NormalIIDSampler
from fixedwidth.stopping import (
    ABSOLUTE,
    RELMAG,
    RELSD,
    StoppingRule,
    bonferroni_delta,
    criterion_met,
    estimate,
    parse_rule_kind,
    penalty,
    run_sequential,
    run_sequential_many,
    threshold,
)

MEAN = ParameterSpec.mean("mu")


def _est(n=100, point=1.0, sigma=1.0, lam=1.0, delta=0.1):
    return IntervalEstimate.build(n, point, sigma, lam, delta)


class TestPenalty:
    def test_examples(self):
        assert penalty(500, 0.1, 1000) == pytest.approx(0.102, abs=1e-15)
        assert penalty(1000, 0.1, 1000) == 0.001
        assert penalty(10**6, 0.3, 1000) == 1e-6

    def test_strict_indicator(self):
        assert penalty(999, 0.1, 1000) == 0.1 + 1 / 999

    def test_bad_n(self):
        with pytest.raises(DomainError):
            penalty(0, 0.1, 10)


class TestThreshold:
    def test_examples(self):
        assert threshold(StoppingRule(ABSOLUTE, 0.05), _est()) == 0.05
        assert threshold(StoppingRule(RELMAG, 0.1), _est(point=-2.5)) == 0.25
        assert threshold(StoppingRule(RELSD, 0.02), _est(lam=1.5811)) == pytest.approx(0.031622, abs=1e-12)


class TestCriterion:
    def test_bruteforce_first_n(self):
        z = normal_quantile(0.95)
        scan = next(n for n in range(1, 10**5) if 2 * z / math.sqrt(n) + 1 / n <= 0.1)
        assert scan == 1103
        rule = StoppingRule(ABSOLUTE, 0.1, delta=0.10, n_star=1)
        assert not criterion_met(rule, _est(n=1102))
        assert criterion_met(rule, _est(n=1103))

    @given(st.integers(1, 999), st.floats(0.0, 10.0))
    def test_never_before_n_star_when_penalty_exceeds_eps(self, n, sigma):
        assert not criterion_met(StoppingRule(ABSOLUTE, 0.1, n_star=1000), _est(n=n, sigma=sigma))

    @given(st.integers(1000, 10**6))
    def test_zero_variance(self, n):
        rule = StoppingRule(ABSOLUTE, 0.01, n_star=1000)
        assert criterion_met(rule, _est(n=n, sigma=0.0)) == (1 / n <= 0.01)

    def test_per_parameter_epsilon(self):
        rule = StoppingRule(ABSOLUTE, (0.5, 0.01), n_star=1)
        assert criterion_met(rule, _est(n=10_000), rule.epsilon_for(0))
        assert not criterion_met(rule, _est(n=10_000), rule.epsilon_for(1))


class TestBonferroni:
    def test_examples(self):
        assert 1 - bonferroni_delta(0.90, 3) == pytest.approx(0.9655, abs=5e-5)
        assert 1 - bonferroni_delta(0.80, 10) == pytest.approx(0.9779, abs=5e-5)
        assert bonferroni_delta(0.95, 1) == pytest.approx(0.05, abs=1e-15)

    @given(st.floats(0.01, 0.99), st.integers(1, 100))
    def test_joint_level(self, conf, k):
        assert (1 - bonferroni_delta(conf, k)) ** k == pytest.approx(conf, rel=1e-12)

    def test_errors(self):
        with pytest.raises(DomainError):
            bonferroni_delta(0.9, 0)
        with pytest.raises(DomainError):
            bonferroni_delta(1.0, 2)


class TestRuleValidation:
    def test_bad_rules(self):
        with pytest.raises(DomainError):
            StoppingRule(ABSOLUTE, 0.0)
        with pytest.raises(DomainError):
            StoppingRule(ABSOLUTE, 0.1, delta=1.0)
        with pytest.raises(DomainError):
            StoppingRule("T9", 0.1)
        with pytest.raises(DomainError):
            StoppingRule(ABSOLUTE, 0.1, n_star=100, max_iterations=50)

    def test_aliases_and_labels(self):
        assert parse_rule_kind("T3") == RELSD
        assert StoppingRule(RELMAG, 0.05).label == "T2(0.05)"
        with pytest.raises(ConfigError):
            parse_rule_kind("fast")

    def test_check_points(self):
        rule = StoppingRule(ABSOLUTE, 0.1, n_star=1000, check_increment=500, max_iterations=2600)
        assert list(rule.check_points()) == [1000, 1500, 2000, 2500]


class TestRunSequential:
    def test_constant_chain_stops_at_first_check(self):
        res = run_sequential(ConstantSampler(4.0), [MEAN], StoppingRule(ABSOLUTE, 0.1), RngStream(0))
        assert res.n_stop == 1000 and not res.capped and res.checks == 1
        assert res.estimates["mu"].point == 4.0 and res.estimates["mu"].half_width == 0.0

    def test_zero_magnitude_is_capped(self):
        rule = StoppingRule(RELMAG, 0.1, max_iterations=5000)
        res = run_sequential(ConstantSampler(0.0), [MEAN], rule, RngStream(0))
        assert res.capped and res.n_stop == 5000 and res.checks == 9

    def test_degenerate_quantile_counts_as_not_met(self):
        rule = StoppingRule(ABSOLUTE, 0.1, max_iterations=2000)
        res = run_sequential(ConstantSampler(1.0), [ParameterSpec.quantile("m", 0.5)], rule, RngStream(0))
        assert res.capped and res.estimates["m"] is None

    def test_stops_at_first_satisfying_check_and_not_before(self):
        rule = StoppingRule(RELSD, 0.1, n_star=1000, check_increment=100)
        res = run_sequential(ExpIndependenceSampler(), [MEAN], rule, RngStream(3, 1))
        chain = Chain(ExpIndependenceSampler(), RngStream(3, 1))
        chain.extend_to(res.n_stop)
        for n in range(1000, res.n_stop + 1, 100):
            met = criterion_met(rule, estimate(MEAN, chain.pool.column(0, n), rule.delta))
            assert met == (n == res.n_stop)

    def test_determinism(self):
        rule = StoppingRule(RELSD, 0.1)
        specs = [MEAN, ParameterSpec.quantile("med", 0.5)]
        a = run_sequential(ExpIndependenceSampler(), specs, rule, RngStream(9, 2))
        b = run_sequential(ExpIndependenceSampler(), specs, rule, RngStream(9, 2))
        assert a.n_stop == b.n_stop and a.estimates == b.estimates

    def test_many_matches_single(self):
        rules = [StoppingRule(k, 0.1) for k in (ABSOLUTE, RELMAG, RELSD)]
        specs = [MEAN, ParameterSpec.quantile("med", 0.5)]
        many = run_sequential_many(Chain(ExpIndependenceSampler(), RngStream(4, 4)), specs, rules)
        for rule, got in zip(rules, many):
            alone = run_sequential(ExpIndependenceSampler(), specs, rule, RngStream(4, 4))
            assert got.n_stop == alone.n_stop and got.estimates == alone.estimates

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32), st.sampled_from([ABSOLUTE, RELMAG, RELSD]))
    def test_smaller_epsilon_never_stops_sooner(self, seed, kind):
        rules = [StoppingRule(kind, e, check_increment=250) for e in (0.2, 0.15, 0.1, 0.07)]
        res = run_sequential_many(Chain(ExpIndependenceSampler(), RngStream(seed, 1)), [MEAN], rules)
        stops = [r.n_stop for r in res]
        assert stops == sorted(stops)

    def test_multivariate_needs_all_parameters(self):
        specs = [ParameterSpec.mean("a"), ParameterSpec.quantile("b", 0.9)]
        rule = StoppingRule(RELSD, 0.1, check_increment=100)
        res = run_sequential(ExpIndependenceSampler(), specs, rule, RngStream(2, 2))
        solo = [run_sequential(ExpIndependenceSampler(), [s], rule, RngStream(2, 2)).n_stop for s in specs]
        assert res.n_stop >= max(solo)

    def test_epsilon_vector_length_checked(self):
        with pytest.raises(ConfigError):
            run_sequential(ExpIndependenceSampler(), [MEAN], StoppingRule(ABSOLUTE, (0.1, 0.2)), RngStream(0))

    def test_injected_estimator_errors_are_not_met(self):
        def failing(spec, trace, delta, sched):
            raise InsufficientDataError("never ready")
        rule = StoppingRule(ABSOLUTE, 0.1, max_iterations=1500)
        res = run_sequential(ConstantSampler(), [MEAN], rule, RngStream(0), estimator=failing)
        assert res.capped


def _uncorrected_stop(chain, eps, delta, start=10, step=10, cap=100_000):
    """Absolute-precision rule without the penalty term, checked from tiny n."""
    for n in range(start, cap, step):
        chain.extend_to(n)
        try:
            est = estimate(MEAN, chain.pool.column(0, n), delta)
        except InsufficientDataError:
            continue
        if 2 * est.half_width <= eps:
            return n, est
    raise AssertionError("uncorrected rule did not stop")


def test_uncorrected_rule_terminates_too_early():
    rule = StoppingRule(ABSOLUTE, 0.3, delta=0.1, n_star=1000, check_increment=10)
    reps = 400
    early, cover_raw, cover_pen = 0, 0, 0
    for i in range(reps):
        n_raw, est_raw = _uncorrected_stop(Chain(ExpIndependenceSampler(), RngStream(77, i)), 0.3, 0.1)
        pen = run_sequential(ExpIndependenceSampler(), [MEAN], rule, RngStream(77, i))
        early += n_raw < rule.n_star
        cover_raw += interval_contains(est_raw, 1.0)
        cover_pen += interval_contains(pen.estimates["mu"], 1.0)
    assert early == reps
    # nominal level is 0.90; the penalized rule stays near it, the raw rule falls well short
    assert cover_raw / reps < 0.80 < cover_pen / reps
