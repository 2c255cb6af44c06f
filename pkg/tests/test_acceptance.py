"""End-to-end acceptance checks; each prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.signal import lfilter

from conftest import ACCEPTANCE_LINES, bm_bruteforce, order_statistic_quantile
from fixedwidth.config import parse_config
from fixedwidth.core import ParameterSpec, RngStream
from fixedwidth.harness import run_replications
from fixedwidth.mcse import bm_variance
from fixedwidth.quantile import empirical_quantile, quantile_variance
from fixedwidth.report import emit_report
from fixedwidth.samplers import Chain, ExpIndependenceSampler
from fixedwidth.stopping import ABSOLUTE, RELMAG, RELSD, StoppingRule, estimate, run_sequential_many


def _record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _exp_config(parameters, rule, epsilon):
    return parse_config(f"""
sampler = exp_indep
parameters = {parameters}
rule = {rule}
epsilon = {epsilon}
delta = 0.10
n_star = 1000
check_increment = 500
replications = 500
seed = 2013
""")


def _one(report):
    (s,) = report.settings
    return s


_criterion1 = {}


def _run_criterion1():
    if not _criterion1:
        cfg = _exp_config("mean:mean", "absolute", 0.1)
        t0 = time.perf_counter()
        report = run_replications(cfg)
        _criterion1.update(report=report, seconds=time.perf_counter() - t0,
                           csv=emit_report(report, "csv"))
    return _criterion1


def test_criterion_01_exp_mean_absolute():
    got = _run_criterion1()
    s = _one(got["report"])
    cov = s.parameters[0].coverage
    ok = 0.844 <= cov <= 0.924 and 1830 <= s.mean_nstop <= 3050 and got["seconds"] < 120
    _record(1, ok, f"coverage {cov:.3f} in [0.844, 0.924]; mean n_stop {s.mean_nstop:.0f} "
                   f"in [1830, 3050]; {got['seconds']:.1f}s < 120s")


def test_criterion_02_exp_mean_relsd():
    s = _one(run_replications(_exp_config("mean:mean", "relsd", 0.05)))
    cov = s.parameters[0].coverage
    ok = 0.848 <= cov <= 0.928 and 6675 <= s.mean_nstop <= 11125
    _record(2, ok, f"coverage {cov:.3f} in [0.848, 0.928]; mean n_stop {s.mean_nstop:.0f} in [6675, 11125]")


def test_criterion_03_exp_median_relsd():
    s = _one(run_replications(_exp_config("median:q0.5", "relsd", 0.1)))
    cov = s.parameters[0].coverage
    ok = 0.82 <= cov <= 0.91 and 2100 <= s.mean_nstop <= 3500
    _record(3, ok, f"coverage {cov:.3f} in [0.82, 0.91]; mean n_stop {s.mean_nstop:.0f} in [2100, 3500]")


def test_criterion_04_bonferroni_region():
    cfg = parse_config("""
sampler = exp_indep
parameters = mean:mean, q10:q0.1, q90:q0.9
rule = relsd
epsilon = 0.1
overall_confidence = 0.90
n_star = 10000
check_increment = 5000
replications = 300
seed = 2013
""")
    report = run_replications(cfg)
    s = _one(report)
    stops = {row[0] for row in report.n_stops}
    ok = stops == {10000} and s.capped == 0 and s.region_coverage >= 0.88
    _record(4, ok, f"n_stop values {sorted(stops)} (all 10000); region coverage "
                   f"{s.region_coverage:.3f} >= 0.88")


def test_criterion_05_mixture_gibbs():
    cfg = parse_config("""
sampler = mixture_gibbs
parameters = EX1:mean@0, q10_X1:q0.1@0, q90_X1:q0.9@0, EX2:mean@1, q10_X2:q0.1@1, q90_X2:q0.9@1
rule = relsd
epsilon = 0.05
delta = 0.05
n_star = 5000
check_increment = 1000
replications = 300
seed = 2013
workers = 4
""")
    report = run_replications(cfg)
    s = _one(report)
    covs = [p.coverage for p in s.parameters]
    at_first_check = sum(row[0] == 5000 for row in report.n_stops)
    cov_ok = all(0.91 <= c <= 0.98 for c in covs)
    length_ok = 2800 <= s.mean_nstop <= 4800 or at_first_check == len(report.n_stops)
    _record(5, cov_ok and length_ok and s.capped == 0,
            f"coverages {', '.join(f'{c:.3f}' for c in covs)} in [0.91, 0.98]; mean n_stop "
            f"{s.mean_nstop:.0f} (SD {s.sd_nstop:.0f}) in [2800, 4800] or all at 5000 "
            f"({at_first_check}/{len(report.n_stops)} stopped at the first check)")


def test_criterion_06_scaling_law():
    cfg = parse_config("""
sampler = normal_iid
parameters = m:mean
rule = relsd
epsilon = 0.05
delta = 0.10
n_star = 1000
check_increment = 100
replications = 200
seed = 2013
""")
    report = run_replications(cfg)
    mean_scaled = math.fsum(0.05 * math.sqrt(row[0]) for row in report.n_stops) / len(report.n_stops)
    target = 2 * 1.6448536
    ok = abs(mean_scaled - target) <= 0.1 * target
    _record(6, ok, f"mean eps*sqrt(n_stop) {mean_scaled:.4f} within 10% of {target:.4f}")


def test_criterion_07_oracle_equivalence():
    rng = np.random.default_rng(7)
    worst, checked = 0.0, 0
    for _ in range(1000):
        n = int(rng.integers(4, 65))
        y = rng.uniform(-10, 10, size=n)
        for b in range(1, n // 2 + 1):
            got = bm_variance(y, batch=b)
            want = bm_bruteforce(list(y), b)
            worst = max(worst, abs(got - want) / abs(want))
            checked += 1
    alphabet = (-1.5, 0.0, 2.0)
    levels = (0.01, 0.1, 0.125, 0.2, 0.25, 0.3, 0.375, 0.4, 0.5, 0.6, 0.625, 0.75, 0.8, 0.875, 0.9, 0.99)
    mismatches = traces = 0
    for n in range(1, 9):
        for y in itertools.product(alphabet, repeat=n):
            traces += 1
            for q in levels:
                mismatches += empirical_quantile(y, q) != order_statistic_quantile(list(y), q)
    ok = worst <= 1e-12 and mismatches == 0
    _record(7, ok, f"bm_variance worst relative error {worst:.2e} <= 1e-12 over {checked} (trace, b) pairs; "
                   f"empirical_quantile mismatches {mismatches} over {traces} traces x {len(levels)} levels")


def test_criterion_08_estimator_consistency():
    ar_hits = 0
    for seed in range(50):
        e = np.random.default_rng(seed).standard_normal(1_000_000)
        ar_hits += 3.4 <= bm_variance(lfilter([1.0], [1.0, -0.5], e)) <= 4.6
    g_hits = 0
    for seed in range(50):
        y = np.random.default_rng(10_000 + seed).exponential(size=100_000)
        g_hits += 0.85 <= quantile_variance(y, 0.5).gamma2_hat <= 1.15
    ok = ar_hits >= 45 and g_hits >= 45
    _record(8, ok, f"AR(1) BM in [3.4, 4.6] for {ar_hits}/50 seeds; Exp median gamma^2 in "
                   f"[0.85, 1.15] for {g_hits}/50 seeds (need 45)")


def test_criterion_09_cross_rule_reduction():
    spec = ParameterSpec.mean("mean")

    def frozen(field):
        def est(s, trace, delta, sched):
            return estimate(s, trace, delta, sched).with_overrides(**{field: 1.0})
        return est

    eps = 0.02
    mismatches = []
    for seed in range(50):
        base = [StoppingRule(ABSOLUTE, eps, check_increment=100)]
        t1 = run_sequential_many(Chain(ExpIndependenceSampler(), RngStream(seed, 1)), [spec], base)[0]
        t3 = run_sequential_many(Chain(ExpIndependenceSampler(), RngStream(seed, 1)), [spec],
                                 [StoppingRule(RELSD, eps, check_increment=100)],
                                 estimator=frozen("lambda_hat"))[0]
        t2 = run_sequential_many(Chain(ExpIndependenceSampler(), RngStream(seed, 1)), [spec],
                                 [StoppingRule(RELMAG, eps, check_increment=100)],
                                 estimator=frozen("point"))[0]
        if not t1.n_stop == t2.n_stop == t3.n_stop:
            mismatches.append((seed, t1.n_stop, t2.n_stop, t3.n_stop))
    _record(9, not mismatches, f"T2/T3 with frozen scale match T1 on {50 - len(mismatches)}/50 trajectories")


def test_criterion_10_determinism():
    first = _run_criterion1()["csv"]
    again = emit_report(run_replications(_exp_config("mean:mean", "absolute", 0.1)), "csv")
    _record(10, first == again, f"two runs of criterion 1 give byte-identical CSV ({len(first)} bytes)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
