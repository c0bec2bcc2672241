# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: scaled Ei, Ryser permanent, Filon panel sums."""

from libc.math cimport exp, log, sin, cos, fabs
import numpy as np

cdef double EULER_GAMMA = 0.57721566490153286061
cdef double SERIES_CUTOFF = 40.0
cdef double MOMENT_SWITCH = 0.5
cdef int NSER = 10


cdef double _ei_series(double x) nogil:
    cdef double term = 1.0, total = 0.0, inc
    cdef int k = 1
    while True:
        term *= x / k
        inc = term / k
        total += inc
        if inc < 1e-17 * fabs(total) or k > 500:
            break
        k += 1
    return EULER_GAMMA + log(x) + total


cdef double _scaled_ei_asymptotic(double x) nogil:
    cdef double total = 1.0, term = 1.0, nxt
    cdef int k = 1
    while k < 200:
        nxt = term * k / x
        if nxt > term or nxt < 1e-18:
            if nxt < 1e-18:
                total += nxt
            break
        term = nxt
        total += term
        k += 1
    return total / x


cdef double _scaled_ei(double x) nogil:
    if x <= SERIES_CUTOFF:
        return exp(-x) * _ei_series(x)
    return _scaled_ei_asymptotic(x)


def scaled_ei(double x):
    """e^{-x} Ei(x) for x > 0."""
    return _scaled_ei(x)


def ei(double x):
    """Ei(x) for 0 < x <= ~709."""
    if x <= SERIES_CUTOFF:
        return _ei_series(x)
    return exp(x) * _scaled_ei_asymptotic(x)


def scaled_ei_array(x):
    arr = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(arr)
    cdef double[::1] src = arr.reshape(-1)
    cdef double[::1] dst = out.reshape(-1)
    cdef Py_ssize_t i, n = src.shape[0]
    with nogil:
        for i in range(n):
            dst[i] = _scaled_ei(src[i])
    return out


def permanent(matrix):
    """Ryser formula with Gray-code subset ordering, O(2^n n)."""
    a_arr = np.ascontiguousarray(matrix, dtype=np.complex128)
    cdef double complex[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    rs_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] rs = rs_arr
    cdef double complex total = 0.0, prod
    cdef unsigned long long g, gprev = 0, k, nsub = 1ULL << n
    cdef unsigned long long diff
    cdef Py_ssize_t i, j
    cdef int size = 0
    cdef double sgn
    with nogil:
        for k in range(1, nsub):
            g = k ^ (k >> 1)
            diff = g ^ gprev
            j = 0
            while (diff >> j) != 1:
                j += 1
            if g & diff:
                for i in range(n):
                    rs[i] = rs[i] + a[i, j]
                size += 1
            else:
                for i in range(n):
                    rs[i] = rs[i] - a[i, j]
                size -= 1
            gprev = g
            prod = 1.0
            for i in range(n):
                prod = prod * rs[i]
            sgn = 1.0 if (n - size) % 2 == 0 else -1.0
            total = total + sgn * prod
    return complex(total)


cdef double _c0[10]
cdef double _c1[10]
cdef double _c2[10]


cdef void _init_coeffs():
    cdef int j
    cdef double f2j = 1.0  # (2j)!
    cdef double sg
    for j in range(NSER):
        if j > 0:
            f2j *= (2 * j - 1) * (2 * j)
        sg = 1.0 if j % 2 == 0 else -1.0
        _c0[j] = sg / (f2j * (2 * j + 1))
        _c1[j] = sg / (f2j * (2 * j + 1) * (2 * j + 3))
        _c2[j] = sg / (f2j * (2 * j + 3))


_init_coeffs()


cdef inline double _horner(double* cf, double t2) nogil:
    cdef double acc = 0.0
    cdef int j
    for j in range(NSER - 1, -1, -1):
        acc = acc * t2 + cf[j]
    return acc


def filon_panels(xm, h, fa, fm, fb, double omega):
    """Sum over panels of int quadratic(f) * exp(-i omega x) dx."""
    cdef double[::1] xv = np.ascontiguousarray(xm, dtype=np.float64)
    cdef double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef double complex[::1] av = np.ascontiguousarray(fa, dtype=np.complex128)
    cdef double complex[::1] mv = np.ascontiguousarray(fm, dtype=np.complex128)
    cdef double complex[::1] bv = np.ascontiguousarray(fb, dtype=np.complex128)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double th, s, c, t2, m0, m2, m1i, ph
    cdef double complex m1, ca, cb, cc, acc = 0.0, e
    with nogil:
        for i in range(n):
            th = omega * hv[i]
            if fabs(th) < MOMENT_SWITCH:
                t2 = th * th
                m0 = 2.0 * _horner(_c0, t2)
                m1i = -2.0 * th * _horner(_c1, t2)
                m2 = 2.0 * _horner(_c2, t2)
            else:
                s = sin(th)
                c = cos(th)
                m0 = 2.0 * s / th
                m1i = -2.0 * (s / (th * th) - c / th)
                m2 = 2.0 * (s / th + 2.0 * c / (th * th) - 2.0 * s / (th * th * th))
            m1 = 1j * m1i
            ca = mv[i]
            cb = 0.5 * (bv[i] - av[i])
            cc = 0.5 * (av[i] + bv[i]) - mv[i]
            ph = -omega * xv[i]
            e = cos(ph) + 1j * sin(ph)
            acc = acc + hv[i] * e * (ca * m0 + cb * m1 + cc * m2)
    return complex(acc)
