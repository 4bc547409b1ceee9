# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled frequency-quadrature kernels.

Same signatures and semantics as ``_pykernels``.  Reductions use a fixed
pairwise tree so results are reproducible for a given node set.
"""

from libc.math cimport sin, cos
from libc.stdlib cimport malloc, free

cdef Py_ssize_t _BLOCK = 16


cdef double _pairwise(double* x, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, m
    cdef double s
    if n <= _BLOCK:
        s = 0.0
        for i in range(n):
            s += x[i]
        return s
    m = n // 2
    return _pairwise(x, m) + _pairwise(x + m, n - m)


cdef inline double _sinc_t(double u, double t) noexcept nogil:
    if u == 0.0:
        return t
    return sin(u * t) / u


cdef inline double _avg_sinc(double u, double T) noexcept nogil:
    cdef double s
    if u == 0.0:
        return 0.5 * T
    s = sin(0.5 * u * T)
    return 2.0 * s * s / (u * u * T)


cdef double* _alloc(Py_ssize_t n) except NULL:
    cdef double* buf = <double*> malloc((n if n > 0 else 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    return buf


def pole_sum(const double[::1] om, const double[::1] wt, const double[::1] h,
             double h_pole, double pole, double t):
    cdef Py_ssize_t n = om.shape[0], i
    cdef double* re = _alloc(n)
    cdef double* im = _alloc(n)
    cdef double u, q, ph, sr, si
    with nogil:
        for i in range(n):
            u = om[i] - pole
            q = wt[i] * (h[i] - h_pole) / u
            ph = u * t
            re[i] = q * cos(ph)
            im[i] = -q * sin(ph)
        sr = _pairwise(re, n)
        si = _pairwise(im, n)
    free(re)
    free(im)
    return complex(sr, si)


def direct_sum(const double[::1] om, const double[::1] wt, const double[::1] h,
               double pole, double t):
    cdef Py_ssize_t n = om.shape[0], i
    cdef double* re = _alloc(n)
    cdef double* im = _alloc(n)
    cdef double u, q, ph, sr, si
    with nogil:
        for i in range(n):
            u = om[i] - pole
            q = wt[i] * h[i] / u
            ph = u * t
            re[i] = q * cos(ph)
            im[i] = -q * sin(ph)
        sr = _pairwise(re, n)
        si = _pairwise(im, n)
    free(re)
    free(im)
    return complex(sr, si)


def sinc_pair_sum(const double[::1] om, const double[::1] wt, const double[::1] h,
                  double a, double t):
    cdef Py_ssize_t n = om.shape[0], i
    cdef double* buf = _alloc(n)
    cdef double s
    with nogil:
        for i in range(n):
            buf[i] = wt[i] * h[i] * (_sinc_t(om[i] - a, t) - _sinc_t(om[i] + a, t))
        s = _pairwise(buf, n)
    free(buf)
    return s


def avg_sinc_pair_sum(const double[::1] om, const double[::1] wt, const double[::1] h,
                      double a, double T):
    cdef Py_ssize_t n = om.shape[0], i
    cdef double* buf = _alloc(n)
    cdef double s
    with nogil:
        for i in range(n):
            buf[i] = wt[i] * h[i] * (_avg_sinc(om[i] - a, T) - _avg_sinc(om[i] + a, T))
        s = _pairwise(buf, n)
    free(buf)
    return s


def lorentz_pair_sum(const double[::1] om, const double[::1] wt, const double[::1] h,
                     double w0, double eps):
    cdef Py_ssize_t n = om.shape[0], i
    cdef double* re = _alloc(n)
    cdef double* im = _alloc(n)
    cdef double u, v, du, dv, c, sr, si
    cdef double e2 = eps * eps
    with nogil:
        for i in range(n):
            u = om[i] - w0
            v = om[i] + w0
            du = u * u + e2
            dv = v * v + e2
            c = wt[i] * h[i]
            re[i] = c * (eps / du - eps / dv)
            im[i] = c * (u / du - v / dv)
        sr = _pairwise(re, n)
        si = _pairwise(im, n)
    free(re)
    free(im)
    return sr, si
