# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled modular-arithmetic kernels over uint64 residue arrays.

Every modulus handed to these routines satisfies m <= 2**62, so sums of two
residues never overflow; products go through a 128-bit intermediate.
"""
import numpy as np

from libc.stdint cimport uint64_t

cdef extern from *:
    """
    static inline unsigned long long qv_mulmod(unsigned long long a,
                                               unsigned long long b,
                                               unsigned long long m) {
        return (unsigned long long)(((unsigned __int128)a * b) % m);
    }
    """
    unsigned long long qv_mulmod(unsigned long long a, unsigned long long b,
                                 unsigned long long m) nogil


def mulmod(const uint64_t[:] a, const uint64_t[:] b, uint64_t m):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = qv_mulmod(a[i], b[i], m)
    return out


def scalmod(const uint64_t[:] a, uint64_t c, uint64_t m):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    c = c % m
    with nogil:
        for i in range(n):
            o[i] = qv_mulmod(a[i], c, m)
    return out


def geometric(uint64_t base, Py_ssize_t n, uint64_t m):
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t acc = 1 % m
    cdef Py_ssize_t i
    base = base % m
    with nogil:
        for i in range(n):
            o[i] = acc
            acc = qv_mulmod(acc, base, m)
    return out


def summod(const uint64_t[:] a, uint64_t m):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef uint64_t acc = 0
    with nogil:
        for i in range(n):
            acc += a[i]
            if acc >= m:
                acc -= m
    return int(acc % m)


def weighted_sum(const uint64_t[:] a, uint64_t base, uint64_t m, uint64_t start=1):
    """Return sum_i a[i] * start * base**i mod m."""
    cdef Py_ssize_t i, n = a.shape[0]
    cdef uint64_t acc = 0, w = start % m
    base = base % m
    with nogil:
        for i in range(n):
            acc += qv_mulmod(a[i], w, m)
            if acc >= m:
                acc -= m
            w = qv_mulmod(w, base, m)
    return int(acc)


def dotmod(const uint64_t[:] a, const uint64_t[:] b, uint64_t m):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef uint64_t acc = 0
    with nogil:
        for i in range(n):
            acc += qv_mulmod(a[i], b[i], m)
            if acc >= m:
                acc -= m
    return int(acc)


def cumsum_mod(const uint64_t[:] a, uint64_t m):
    cdef Py_ssize_t i, n = a.shape[0]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t acc = 0
    with nogil:
        for i in range(n):
            acc += a[i]
            if acc >= m:
                acc -= m
            o[i] = acc
    return out


def cross_sum(const uint64_t[:] f, const uint64_t[:] g, uint64_t m, bint cyclic):
    """out[z] = sum_x f[x] * g[z - x], z and x in range(len(f)).

    Linear mode: g has length 2P-1 and g[j] holds the value at offset j-(P-1).
    Cyclic mode: g has length P and the index is taken mod P.
    """
    cdef Py_ssize_t P = f.shape[0], z, x, j
    cdef uint64_t acc
    out = np.empty(P, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for z in range(P):
            acc = 0
            for x in range(P):
                if cyclic:
                    j = z - x
                    if j < 0:
                        j += P
                else:
                    j = z - x + P - 1
                acc += qv_mulmod(f[x], g[j], m)
                if acc >= m:
                    acc -= m
            o[z] = acc
    return out
