import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.signal import lfilter

from conftest import bm_bruteforce
from fixedwidth.core import DomainError, InsufficientDataError
from fixedwidth.mcse import (
    POWER_OF_TWO,
    BatchSchedule,
    batch_size,
    bm_variance,
    mean_estimate,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


class TestBatchSize:
    def test_examples(self):
        assert batch_size(100) == (10, 10)
        assert batch_size(1000) == (31, 32)
        assert batch_size(200, BatchSchedule(0.5, POWER_OF_TWO)) == (8, 25)

    def test_exact_roots_not_floored_down(self):
        assert batch_size(1000, BatchSchedule(1 / 3)) == (10, 100)
        assert batch_size(2**20, BatchSchedule(0.25)) == (32, 2**15)

    @given(st.integers(1, 10**7), st.sampled_from([0.3, 0.5, 0.6, 0.9]),
           st.sampled_from(["floor_pow", "power_of_two"]))
    def test_invariants(self, n, tau, mode):
        sched = BatchSchedule(tau, mode)
        b, a = batch_size(n, sched)
        assert 1 <= b <= n and a == n // b and a >= 1
        assert batch_size(n + 1, sched)[0] >= b
        if mode == POWER_OF_TWO:
            assert b & (b - 1) == 0

    def test_bad_input(self):
        with pytest.raises(DomainError):
            batch_size(0)
        with pytest.raises(DomainError):
            BatchSchedule(1.0)
        with pytest.raises(DomainError):
            BatchSchedule(0.5, "weird")


class TestMeanEstimate:
    def test_examples(self):
        assert mean_estimate([1, 1, 1, 1]) == (1.0, 0.0)
        m, s = mean_estimate([0, 2])
        assert m == 1.0 and s == pytest.approx(1.4142136, abs=1e-7)
        m, s = mean_estimate([1, 2, 3, 4, 5])
        assert m == 3.0 and s == pytest.approx(1.5811388, abs=1e-7)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            mean_estimate([1.0])


class TestBmVariance:
    def test_constant_and_alternating(self):
        assert bm_variance(np.full(50, 3.7)) == 0.0
        alt = np.tile([1.0, -1.0], 8)
        assert bm_variance(alt, batch=4) == 0.0

    def test_one_through_nine(self):
        y = list(range(1, 10))
        # batch means 2, 5, 8 around grand mean 5: (3/2) * (9 + 0 + 9)
        assert bm_bruteforce(y, 3) == 27.0
        assert bm_variance(y) == 27.0

    def test_tail_excluded_from_batches_but_in_grand_mean(self):
        y = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 100.0]
        assert batch_size(10) == (3, 3)
        assert bm_variance(y) == pytest.approx(bm_bruteforce(y, 3), rel=1e-14)

    def test_needs_two_batches(self):
        with pytest.raises(InsufficientDataError):
            bm_variance([1.0])
        with pytest.raises(InsufficientDataError):
            bm_variance([1.0, 2.0, 3.0], batch=2)

    @settings(max_examples=300, deadline=None)
    @given(arrays(np.float64, st.integers(4, 200), elements=finite))
    def test_matches_bruteforce(self, y):
        b, a = batch_size(len(y))
        assume(a >= 2)
        want = bm_bruteforce(list(y), b)
        assert bm_variance(y) == pytest.approx(want, rel=1e-9, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, st.integers(4, 200), elements=finite),
           st.floats(-1e3, 1e3), st.floats(1e-3, 10), st.booleans())
    def test_shift_and_scale(self, y, shift, c, negate):
        c = -c if negate else c
        base = bm_variance(y)
        tol = 1e-7 * (1 + float(np.abs(y).max()) + abs(shift)) ** 2
        assert bm_variance(y + shift) == pytest.approx(base, abs=tol)
        assert bm_variance(c * y) == pytest.approx(c * c * base, rel=1e-9, abs=tol * c * c)

    def test_nonnegative(self, rng):
        for _ in range(50):
            assert bm_variance(rng.normal(size=rng.integers(4, 500))) >= 0.0

    def test_incremental_equals_scratch(self, rng):
        y = rng.normal(size=20_000)
        grown = np.empty(0)
        for n in range(100, 20_001, 700):
            grown = np.concatenate([grown, y[len(grown):n]])
            assert bm_variance(grown) == bm_variance(y[:n].copy())
            assert bm_variance(grown) == pytest.approx(bm_bruteforce(list(y[:n]), batch_size(n)[0]),
                                                       rel=1e-10)

    @pytest.mark.slow
    def test_iid_normal_consistency(self):
        hits = 0
        for seed in range(100):
            y = np.random.default_rng(seed).standard_normal(100_000)
            hits += 0.85 <= bm_variance(y) <= 1.15
        assert hits >= 95

    @pytest.mark.slow
    def test_ar1_consistency(self):
        hits = 0
        for seed in range(50):
            e = np.random.default_rng(1000 + seed).standard_normal(1_000_000)
            x = lfilter([1.0], [1.0, -0.5], e)
            hits += 3.4 <= bm_variance(x) <= 4.6
        assert hits >= 45
