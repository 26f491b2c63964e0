# cython: language_level=3
"""Compiled inner loops over dense composition tables.

A table entry of -1 marks a non-composable pair.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def associativity_violations(const cnp.int64_t[:, ::1] table, Py_ssize_t limit=64):
    cdef Py_ssize_t m = table.shape[0]
    cdef Py_ssize_t a, b, c, ab, bc, left, right, found = 0
    out = np.empty((limit, 3), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    for a in range(m):
        for b in range(m):
            ab = table[a, b]
            if ab < 0:
                continue
            for c in range(m):
                bc = table[b, c]
                if bc < 0:
                    continue
                left = table[ab, c]
                right = table[a, bc]
                if left != right or left < 0:
                    if found < limit:
                        o[found, 0] = a
                        o[found, 1] = b
                        o[found, 2] = c
                    found += 1
                    if found >= limit:
                        return out[:found]
    return out[:found]


def convolve(const double complex[::1] f, const double complex[::1] g,
             const cnp.int64_t[:, ::1] table, const cnp.int64_t[::1] inv,
             const cnp.int64_t[::1] src, const cnp.int64_t[::1] fiber_ptr,
             const cnp.int64_t[::1] fiber_arrows, const double[::1] weight):
    cdef Py_ssize_t m = table.shape[0]
    cdef Py_ssize_t gam, k, eta, x, c
    cdef double complex acc
    out = np.zeros(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    for gam in range(m):
        x = src[gam]
        acc = 0
        for k in range(fiber_ptr[x], fiber_ptr[x + 1]):
            eta = fiber_arrows[k]
            c = table[gam, inv[eta]]
            acc = acc + f[c] * g[eta] * weight[eta]
        o[gam] = acc
    return out


def regular_matrix(const double complex[::1] f, const cnp.int64_t[::1] fiber,
                   const cnp.int64_t[:, ::1] table, const cnp.int64_t[::1] inv,
                   const double[::1] weight):
    cdef Py_ssize_t n = fiber.shape[0]
    cdef Py_ssize_t i, j, gam, eta
    cdef double wi
    out = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    for i in range(n):
        gam = fiber[i]
        wi = weight[gam] ** 0.5
        for j in range(n):
            eta = fiber[j]
            o[i, j] = wi * f[table[gam, inv[eta]]] * weight[eta] ** 0.5
    return out
