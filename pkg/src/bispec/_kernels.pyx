# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the bispectrum forward map, objective and gradient.

Signatures and semantics mirror ``bispec._kernels_py`` exactly; the test
suite checks the two against each other. Complex arrays are handled as
interleaved (re, im) float64 pairs so the loops stay in plain C arithmetic.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def bispectrum(y):
    cdef const double[:, ::1] v = np.ascontiguousarray(y, dtype=np.complex128).view(np.float64).reshape(-1, 2)
    cdef Py_ssize_t n = v.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    cdef double[:, ::1] o = out.view(np.float64)
    cdef Py_ssize_t k1, k2, d
    cdef double ar, ai, br, bi, pr, pi
    with nogil:
        for k1 in range(n):
            for k2 in range(n):
                d = k1 - k2
                if d < 0:
                    d = d + n
                # y[k1] * conj(y[k2])
                ar = v[k1, 0] * v[k2, 0] + v[k1, 1] * v[k2, 1]
                ai = v[k1, 1] * v[k2, 0] - v[k1, 0] * v[k2, 1]
                br = v[d, 0]
                bi = v[d, 1]
                o[k1, 2 * k2] = ar * br - ai * bi
                o[k1, 2 * k2 + 1] = ar * bi + ai * br
    return out


def objective(y, bf, mask):
    cdef const double[:, ::1] v = np.ascontiguousarray(y, dtype=np.complex128).view(np.float64).reshape(-1, 2)
    cdef const double[:, ::1] b = np.ascontiguousarray(bf, dtype=np.complex128).view(np.float64)
    cdef const cnp.uint8_t[:, ::1] w = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t k1, k2, d
    cdef double total = 0.0
    cdef double ar, ai, rr, ri
    with nogil:
        for k1 in range(n):
            for k2 in range(n):
                if not w[k1, k2]:
                    continue
                d = k1 - k2
                if d < 0:
                    d = d + n
                ar = v[k1, 0] * v[k2, 0] + v[k1, 1] * v[k2, 1]
                ai = v[k1, 1] * v[k2, 0] - v[k1, 0] * v[k2, 1]
                rr = b[k1, 2 * k2] - (ar * v[d, 0] - ai * v[d, 1])
                ri = b[k1, 2 * k2 + 1] - (ar * v[d, 1] + ai * v[d, 0])
                total += rr * rr + ri * ri
    return total


def gradient(y, bf, mask, block):
    cdef const double[:, ::1] v = np.ascontiguousarray(y, dtype=np.complex128).view(np.float64).reshape(-1, 2)
    bf = np.ascontiguousarray(bf, dtype=np.complex128)
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    # row-major copies of the transposes keep every inner access contiguous
    cdef const double[:, ::1] b = bf.view(np.float64)
    cdef const double[:, ::1] bt = np.ascontiguousarray(bf.T).view(np.float64)
    cdef const cnp.uint8_t[:, ::1] w = mask
    cdef const cnp.uint8_t[:, ::1] wt = np.ascontiguousarray(mask.T)
    cdef const Py_ssize_t[::1] blk = np.ascontiguousarray(block, dtype=np.intp)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t q = blk.shape[0]
    cdef Py_ssize_t p, j, k, kmp, pmk, kpp
    cdef double tr, ti, yr, yi
    acc_arr = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] acc = acc_arr
    a2_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] a2 = a2_arr
    for p in range(n):
        a2[p] = v[p, 0] * v[p, 0] + v[p, 1] * v[p, 1]
    out = np.empty(n, dtype=np.complex128)
    cdef double[:, ::1] o = out.view(np.float64).reshape(-1, 2)
    with nogil:
        for j in range(q):
            k = blk[j]
            yr = v[k, 0]
            yi = v[k, 1]
            for p in range(n):
                kmp = k - p
                if kmp < 0:
                    kmp = kmp + n
                pmk = n - kmp
                if pmk == n:
                    pmk = 0
                kpp = k + p
                if kpp >= n:
                    kpp = kpp - n
                if w[k, p]:
                    # y[k] y[k-p] conj(B[k,p])
                    tr = yr * v[kmp, 0] - yi * v[kmp, 1]
                    ti = yr * v[kmp, 1] + yi * v[kmp, 0]
                    acc[p, 0] += tr * b[k, 2 * p] + ti * b[k, 2 * p + 1]
                    acc[p, 1] += ti * b[k, 2 * p] - tr * b[k, 2 * p + 1]
                    acc[p, 2] += a2[k] * a2[kmp]
                if wt[k, p]:
                    # y[k] conj(y[p-k]) B[p,k]
                    tr = yr * v[pmk, 0] + yi * v[pmk, 1]
                    ti = yi * v[pmk, 0] - yr * v[pmk, 1]
                    acc[p, 0] += tr * bt[k, 2 * p] - ti * bt[k, 2 * p + 1]
                    acc[p, 1] += tr * bt[k, 2 * p + 1] + ti * bt[k, 2 * p]
                    acc[p, 2] += a2[k] * a2[pmk]
                if w[k, kmp]:
                    # B[k,k-p] y[k-p] conj(y[k])
                    tr = v[kmp, 0] * yr + v[kmp, 1] * yi
                    ti = v[kmp, 1] * yr - v[kmp, 0] * yi
                    acc[p, 0] += tr * b[k, 2 * kmp] - ti * b[k, 2 * kmp + 1]
                    acc[p, 1] += tr * b[k, 2 * kmp + 1] + ti * b[k, 2 * kmp]
                if wt[k, kpp]:
                    acc[p, 2] += a2[kpp] * a2[k]
        for p in range(n):
            o[p, 0] = v[p, 0] * acc[p, 2] - acc[p, 0]
            o[p, 1] = v[p, 1] * acc[p, 2] - acc[p, 1]
    return out
