# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for batch means, kernel density evaluation and chain loops.

Mirrors ``_pykernels`` operation for operation; see that module for the
argument conventions.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt, fabs

cnp.import_array()

cdef double _TINY_U = 0.5 * 2.0 ** -53
cdef double _INV_SQRT_2PI = 0.3989422804014327


cdef inline double _ppnd16(double p) noexcept nogil:
    cdef double q = p - 0.5
    cdef double r, num, den, val
    if fabs(q) <= 0.425:
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
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = sqrt(-log(r))
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
    if q < 0.0:
        return -val
    return val


cdef inline double _open_normal(double u) noexcept nogil:
    if u == 0.0:
        u = _TINY_U
    return _ppnd16(u)


cdef inline void _two_sum(double a, double b, double* s, double* e) noexcept nogil:
    # error-free transformation: s + e == a + b exactly
    cdef double x = a + b
    cdef double bb = x - a
    e[0] = (a - (x - bb)) + (b - bb)
    s[0] = x


cdef inline double _offset_sum(const double[::1] y, Py_ssize_t lo, Py_ssize_t hi,
                               double r) noexcept nogil:
    # compensated sum of y[lo:hi] - r with each difference split exactly
    cdef Py_ssize_t i
    cdef double s = 0.0, c = 0.0, d, dl, e
    for i in range(lo, hi):
        _two_sum(y[i], -r, &d, &dl)
        _two_sum(s, d, &s, &e)
        c += e + dl
    return s + c


def bm_variance(const double[::1] trace, Py_ssize_t b, Py_ssize_t a):
    cdef Py_ssize_t n = trace.shape[0]
    cdef Py_ssize_t j
    cdef double r, shift, dev, acc = 0.0, comp = 0.0, e
    with nogil:
        # centre near the grand mean; a constant trace keeps r equal to its value
        r = trace[0] + _offset_sum(trace, 0, n, trace[0]) / n
        shift = _offset_sum(trace, 0, n, r) / n
        for j in range(a):
            dev = _offset_sum(trace, j * b, (j + 1) * b, r) / b - shift
            _two_sum(acc, dev * dev, &acc, &e)
            comp += e
    return b * (acc + comp) / (a - 1)


def indicator_bm_variance(const double[::1] trace, double xi, Py_ssize_t b, Py_ssize_t a):
    cdef Py_ssize_t n = trace.shape[0]
    cdef Py_ssize_t i, j, c, total = 0
    cdef double ubar, dev, acc = 0.0
    with nogil:
        for i in range(n):
            if trace[i] <= xi:
                total += 1
        ubar = <double>total / n
        for j in range(a):
            c = 0
            for i in range(j * b, (j + 1) * b):
                if trace[i] <= xi:
                    c += 1
            dev = <double>c / b - ubar
            acc += dev * dev
    return b * acc / (a - 1)


def kde_at(const double[::1] trace, double x, double h):
    cdef Py_ssize_t n = trace.shape[0]
    cdef Py_ssize_t i
    cdef double z, acc = 0.0
    with nogil:
        for i in range(n):
            z = (x - trace[i]) / h
            acc += exp(-0.5 * z * z)
    return acc * _INV_SQRT_2PI / (n * h)


def exp_indep_chain(double x, const double[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef double y
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            y = -2.0 * log1p(-u[i, 0])
            if y <= x or u[i, 1] < exp(0.5 * (x - y)):
                x = y
            o[i] = x
    return out


cdef inline double _gibbs_weight(double x, double mu_a, double sd_a, double mu_b,
                                 double sd_b, double log_ratio) noexcept nogil:
    cdef double za = (x - mu_a) / sd_a
    cdef double zb = (x - mu_b) / sd_b
    # factored so huge |x| overflows to a signed inf instead of inf - inf
    cdef double t = log_ratio + 0.5 * ((za - zb) * (za + zb))
    cdef double e
    if t > 0.0:
        e = exp(-t)
        return e / (1.0 + e)
    return 1.0 / (1.0 + exp(t))


def gibbs_weight(double x, double mu_a, double sd_a, double mu_b, double sd_b, double log_ratio):
    return _gibbs_weight(x, mu_a, sd_a, mu_b, sd_b, log_ratio)


def mixture_gibbs_chain(double x1, double x2, const double[::1] prm, const double[:, ::1] u):
    cdef double mu11 = prm[0], mu12 = prm[1], mu21 = prm[2], mu22 = prm[3]
    cdef double s11 = prm[4], s12 = prm[5], s21 = prm[6], s22 = prm[7]
    cdef double lr2 = prm[8], lr1 = prm[9]
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef double w, z
    out = np.empty((n, 2))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            w = _gibbs_weight(x2, mu12, s12, mu22, s22, lr2)
            z = _open_normal(u[i, 1])
            if u[i, 0] < w:
                x1 = mu11 + s11 * z
            else:
                x1 = mu21 + s21 * z
            w = _gibbs_weight(x1, mu11, s11, mu21, s21, lr1)
            z = _open_normal(u[i, 3])
            if u[i, 2] < w:
                x2 = mu12 + s12 * z
            else:
                x2 = mu22 + s22 * z
            o[i, 0] = x1
            o[i, 1] = x2
    return out


cdef inline double _mixture_logpdf(double x1, double x2, const double[::1] prm) noexcept nogil:
    cdef double a1 = (x1 - prm[0]) / prm[4]
    cdef double a2 = (x2 - prm[1]) / prm[5]
    cdef double b1 = (x1 - prm[2]) / prm[6]
    cdef double b2 = (x2 - prm[3]) / prm[7]
    cdef double la = prm[8] - 0.5 * (a1 * a1 + a2 * a2)
    cdef double lb = prm[9] - 0.5 * (b1 * b1 + b2 * b2)
    if la >= lb:
        return la + log1p(exp(lb - la))
    return lb + log1p(exp(la - lb))


def mixture_logpdf(double x1, double x2, const double[::1] prm):
    return _mixture_logpdf(x1, x2, prm)


def mixture_rw_chain(double x1, double x2, const double[::1] prm, bint normal_proposal,
                     double s1, double s2, const double[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef double y, prop, diff, cur
    out = np.empty((n, 2))
    cdef double[:, ::1] o = out
    with nogil:
        cur = _mixture_logpdf(x1, x2, prm)
        for i in range(n):
            if normal_proposal:
                y = x1 + s1 * _open_normal(u[i, 0])
            else:
                y = x1 + s1 * (2.0 * u[i, 0] - 1.0)
            prop = _mixture_logpdf(y, x2, prm)
            diff = prop - cur
            if diff >= 0.0 or u[i, 1] < exp(diff):
                x1 = y
                cur = prop
            if normal_proposal:
                y = x2 + s2 * _open_normal(u[i, 2])
            else:
                y = x2 + s2 * (2.0 * u[i, 2] - 1.0)
            prop = _mixture_logpdf(x1, y, prm)
            diff = prop - cur
            if diff >= 0.0 or u[i, 3] < exp(diff):
                x2 = y
                cur = prop
            o[i, 0] = x1
            o[i, 1] = x2
    return out


def normal_iid_chain(const double[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _open_normal(u[i, 0])
    return out


def normal_from_uniforms(const double[::1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _open_normal(u[i])
    return out
