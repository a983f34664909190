# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, fabs

cnp.import_array()


cdef inline Py_ssize_t _first_nonzero(const double[::1] x):
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        if x[i] != 0.0:
            return i
    return x.shape[0]


cdef inline Py_ssize_t _last_nonzero(const double[::1] x):
    cdef Py_ssize_t i
    for i in range(x.shape[0] - 1, -1, -1):
        if x[i] != 0.0:
            return i
    return -1


def even_convolve(a, b):
    """Full convolution of two center-symmetric sequences.

    Only the upper half is summed; the lower half is its mirror image.
    Leading and trailing zeros (the mass gap tails) are skipped.
    """
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] br = np.ascontiguousarray(np.asarray(b, dtype=np.float64)[::-1])
    cdef Py_ssize_t na = av.shape[0], nb = br.shape[0]
    cdef Py_ssize_t n = na + nb - 1
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    if na == 0 or nb == 0:
        return out_arr
    cdef Py_ssize_t alo = _first_nonzero(av), ahi = _last_nonzero(av)
    cdef Py_ssize_t blo = _first_nonzero(br), bhi = _last_nonzero(br)
    if ahi < 0 or bhi < 0:
        return out_arr
    cdef Py_ssize_t mid = (n - 1) // 2
    cdef Py_ssize_t k, i, i0, i1, off
    cdef double s0, s1, s2, s3
    with nogil:
        for k in range(mid, n):
            # out[k] = sum_i a[i] b[k-i] = sum_i a[i] br[i + nb - 1 - k]
            off = nb - 1 - k
            i0 = alo
            if blo - off > i0:
                i0 = blo - off
            i1 = ahi
            if bhi - off < i1:
                i1 = bhi - off
            # four partial sums break the dependency chain of the reduction
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            s3 = 0.0
            i = i0
            while i + 3 <= i1:
                s0 = s0 + av[i] * br[i + off]
                s1 = s1 + av[i + 1] * br[i + 1 + off]
                s2 = s2 + av[i + 2] * br[i + 2 + off]
                s3 = s3 + av[i + 3] * br[i + 3 + off]
                i = i + 4
            while i <= i1:
                s0 = s0 + av[i] * br[i + off]
                i = i + 1
            out[k] = (s0 + s1) + (s2 + s3)
        for k in range(0, mid):
            out[k] = out[n - 1 - k]
    return out_arr


def radial_sine_transform(q, r, c):
    """``sum_j c_j sin(q r_j) / (q r_j)`` for every ``q``."""
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t nq = qv.shape[0], nr = rv.shape[0], i, j
    out_arr = np.empty(nq, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s, x
    with nogil:
        for i in range(nq):
            s = 0.0
            for j in range(nr):
                x = qv[i] * rv[j]
                if fabs(x) < 1e-8:
                    s = s + cv[j] * (1.0 - x * x / 6.0)
                else:
                    s = s + cv[j] * sin(x) / x
            out[i] = s
    return out_arr


def trig_moments(f, w, t, int kind):
    """``sum_i w_i (1 - cos f_i t)`` (kind 0) or ``sum_i w_i sin f_i t`` (kind 1) per ``t``."""
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t nf = fv.shape[0], nt = tv.shape[0], i, j
    out_arr = np.empty(nt, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double s, h
    with nogil:
        for j in range(nt):
            s = 0.0
            if kind == 0:
                for i in range(nf):
                    h = sin(0.5 * fv[i] * tv[j])
                    s = s + wv[i] * 2.0 * h * h
            else:
                for i in range(nf):
                    s = s + wv[i] * sin(fv[i] * tv[j])
            out[j] = s
    return out_arr
