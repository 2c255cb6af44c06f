"""Independent reference implementations used as test oracles."""

import math
from fractions import Fraction

import pytest


def bm_bruteforce(values, b):
    """Batch-means variance evaluated exactly in rational arithmetic, then rounded."""
    n = len(values)
    a = n // b
    exact = [Fraction(v) for v in values]
    gbar = sum(exact) / n
    means = [sum(exact[j * b:(j + 1) * b]) / b for j in range(a)]
    return float(Fraction(b, a - 1) * sum((m - gbar) ** 2 for m in means))


def order_statistic_quantile(values, q):
    """Smallest y in the sample with empirical CDF F_n(y) > q, by exhaustive search."""
    n = len(values)
    q = Fraction(repr(float(q)))
    for y in sorted(values):
        if Fraction(int(sum(v <= y for v in values)), n) > q:
            return y
    return max(values)


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
