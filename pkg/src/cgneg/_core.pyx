# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Mirrors cgneg._fallback function for function."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, fabs, M_PI

cnp.import_array()


def laguerre_array(int n, double a, const double[::1] x):
    cdef Py_ssize_t i, m = x.shape[0]
    cdef int k
    cdef double l0, l1, l2, xi
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(m):
        xi = x[i]
        l0 = 1.0
        if n == 0:
            o[i] = l0
            continue
        l1 = 1.0 + a - xi
        for k in range(1, n):
            l2 = ((2.0 * k + 1.0 + a - xi) * l1 - (k + a) * l0) / (k + 1.0)
            l0 = l1
            l1 = l2
        o[i] = l1
    return out


cdef inline double _half_sinc(double a, double x) nogil:
    # sin(2 a x) / (4 a) with a series near a = 0
    if fabs(a) < 1e-4:
        return 0.5 * x - a * a * x * x * x / 3.0
    return sin(2.0 * a * x) / (4.0 * a)


def well_wigner_grid(int n, const double[::1] xs, const double[::1] ps):
    cdef Py_ssize_t i, j, nx = xs.shape[0], npp = ps.shape[0]
    cdef double x, xt, p, c2, pref = 2.0 / (M_PI * M_PI)
    out = np.zeros((nx, npp), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(nx):
            x = xs[i]
            if x < 0.0 or x > M_PI:
                continue
            xt = x if x <= M_PI - x else M_PI - x
            c2 = cos(2.0 * n * xt)
            for j in range(npp):
                p = ps[j]
                o[i, j] = pref * (_half_sinc(p + n, xt) + _half_sinc(p - n, xt)
                                  - 2.0 * c2 * _half_sinc(p, xt))
    return out


def conv_axis0(const double[:, ::1] v, const double[::1] k):
    """out[i, j] = sum_t k[t] v[i + t - r, j], zero outside, t ascending."""
    cdef Py_ssize_t nx = v.shape[0], ny = v.shape[1], r = (k.shape[0] - 1) // 2
    cdef Py_ssize_t i, j, t, s
    cdef double kt
    out = np.zeros((nx, ny), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(nx):
            for t in range(k.shape[0]):
                s = i + t - r
                if s < 0 or s >= nx:
                    continue
                kt = k[t]
                for j in range(ny):
                    o[i, j] = o[i, j] + kt * v[s, j]
    return out


def neg_line_integrals(const double[:, ::1] v, double h):
    """Row-wise integral of max(-v, 0) with exact crossings of the linear interpolant."""
    cdef Py_ssize_t nx = v.shape[0], ny = v.shape[1], i, j
    cdef double f0, f1, acc
    out = np.empty(nx, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(nx):
            acc = 0.0
            for j in range(ny - 1):
                f0 = v[i, j]
                f1 = v[i, j + 1]
                if f0 >= 0.0 and f1 >= 0.0:
                    continue
                if f0 <= 0.0 and f1 <= 0.0:
                    acc = acc - 0.5 * h * (f0 + f1)
                elif f0 < 0.0:
                    acc = acc + 0.5 * h * f0 * f0 / (f1 - f0)
                else:
                    acc = acc + 0.5 * h * f1 * f1 / (f0 - f1)
            o[i] = acc
    return out
