"""Pure-Python kernels, used when the compiled extension is unavailable.

Must stay numerically interchangeable with ``_ckernels.pyx``: chain loops
perform the same floating-point operations in the same order, so both
backends produce bit-identical trajectories from the same uniforms.
"""

import itertools
import math

import numpy as np

from .core import normal_quantile

_TINY_U = 0.5 * 2.0 ** -53
_INV_SQRT_2PI = 0.3989422804014327


def _open_normal(u):
    if u == 0.0:
        u = _TINY_U
    return normal_quantile(u)


def _exact_offset_sum(values, r, count):
    # correctly rounded sum(values) - count*r; fsum adds the exact terms
    return math.fsum(itertools.chain(values, itertools.repeat(-r, count)))


def bm_variance(trace, b, a):
    n = trace.shape[0]
    vals = trace.tolist()
    # centre near the grand mean; a constant trace keeps r equal to its value
    r = vals[0] + _exact_offset_sum(vals, vals[0], n) / n
    shift = _exact_offset_sum(vals, r, n) / n
    devs = [_exact_offset_sum(vals[j * b:(j + 1) * b], r, b) / b - shift for j in range(a)]
    return b * math.fsum(d * d for d in devs) / (a - 1)


def indicator_bm_variance(trace, xi, b, a):
    # integer counts are exact, so no compensation is needed
    ind = trace <= xi
    counts = ind[: a * b].reshape(a, b).sum(axis=1)
    dev = counts / b - int(ind.sum()) / trace.shape[0]
    return b * math.fsum((dev * dev).tolist()) / (a - 1)


def kde_at(trace, x, h):
    z = (x - trace) / h
    return float(np.exp(-0.5 * z * z).sum()) * _INV_SQRT_2PI / (trace.shape[0] * h)


def exp_indep_chain(x, u):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        y = -2.0 * math.log1p(-u[i, 0])
        if y <= x or u[i, 1] < math.exp(0.5 * (x - y)):
            x = y
        out[i] = x
    return out


def _gibbs_weight(x, mu_a, sd_a, mu_b, sd_b, log_ratio):
    za = (x - mu_a) / sd_a
    zb = (x - mu_b) / sd_b
    # factored so huge |x| overflows to a signed inf instead of inf - inf
    t = log_ratio + 0.5 * ((za - zb) * (za + zb))
    if t > 0.0:
        e = math.exp(-t)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(t))


def gibbs_weight(x, mu_a, sd_a, mu_b, sd_b, log_ratio):
    return _gibbs_weight(x, mu_a, sd_a, mu_b, sd_b, log_ratio)


def mixture_gibbs_chain(x1, x2, prm, u):
    # prm: mu11 mu12 mu21 mu22 s11 s12 s21 s22 log_ratio_x2 log_ratio_x1
    mu11, mu12, mu21, mu22, s11, s12, s21, s22, lr2, lr1 = (float(v) for v in prm)
    n = u.shape[0]
    out = np.empty((n, 2))
    for i in range(n):
        w = _gibbs_weight(x2, mu12, s12, mu22, s22, lr2)
        z = _open_normal(u[i, 1])
        x1 = mu11 + s11 * z if u[i, 0] < w else mu21 + s21 * z
        w = _gibbs_weight(x1, mu11, s11, mu21, s21, lr1)
        z = _open_normal(u[i, 3])
        x2 = mu12 + s12 * z if u[i, 2] < w else mu22 + s22 * z
        out[i, 0] = x1
        out[i, 1] = x2
    return out


def mixture_logpdf(x1, x2, prm):
    # prm: mu11 mu12 mu21 mu22 s11 s12 s21 s22 log_c1 log_c2
    mu11, mu12, mu21, mu22, s11, s12, s21, s22, lc1, lc2 = (float(v) for v in prm)
    a1 = (x1 - mu11) / s11
    a2 = (x2 - mu12) / s12
    b1 = (x1 - mu21) / s21
    b2 = (x2 - mu22) / s22
    la = lc1 - 0.5 * (a1 * a1 + a2 * a2)
    lb = lc2 - 0.5 * (b1 * b1 + b2 * b2)
    if la >= lb:
        return la + math.log1p(math.exp(lb - la))
    return lb + math.log1p(math.exp(la - lb))


def mixture_rw_chain(x1, x2, prm, normal_proposal, s1, s2, u):
    n = u.shape[0]
    out = np.empty((n, 2))
    cur = mixture_logpdf(x1, x2, prm)
    for i in range(n):
        if normal_proposal:
            y = x1 + s1 * _open_normal(u[i, 0])
        else:
            y = x1 + s1 * (2.0 * u[i, 0] - 1.0)
        prop = mixture_logpdf(y, x2, prm)
        diff = prop - cur
        if diff >= 0.0 or u[i, 1] < math.exp(diff):
            x1 = y
            cur = prop
        if normal_proposal:
            y = x2 + s2 * _open_normal(u[i, 2])
        else:
            y = x2 + s2 * (2.0 * u[i, 2] - 1.0)
        prop = mixture_logpdf(x1, y, prm)
        diff = prop - cur
        if diff >= 0.0 or u[i, 3] < math.exp(diff):
            x2 = y
            cur = prop
        out[i, 0] = x1
        out[i, 1] = x2
    return out


def normal_iid_chain(u):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = _open_normal(u[i, 0])
    return out


def normal_from_uniforms(u):
    return np.array([_open_normal(v) for v in u], dtype=np.float64)
