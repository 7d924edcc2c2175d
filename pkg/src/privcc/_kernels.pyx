# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics match privcc._kernels_py exactly."""

import numpy as np

from libc.stdint cimport int64_t, uint8_t


def minplus_square(const double[::1] F):
    """G[S] = min over T subset of S containing the lowest bit of S of F[T] + F[S - T].

    F is indexed by subsets of an n-set (length 2^n) with F[0] = 0. Ties keep
    the largest T. Returns (G, argT).
    """
    cdef Py_ssize_t size = F.shape[0]
    G_arr = np.empty(size, dtype=np.float64)
    A_arr = np.empty(size, dtype=np.int64)
    cdef double[::1] G = G_arr
    cdef int64_t[::1] A = A_arr
    cdef int64_t S, low, rest, sub, T, best_t
    cdef double best, val
    G[0] = 0.0
    A[0] = 0
    for S in range(1, size):
        low = S & (-S)
        rest = S ^ low
        best = F[S]
        best_t = S
        sub = rest
        while sub:
            sub = (sub - 1) & rest
            T = sub | low
            val = F[T] + F[S ^ T]
            if val < best:
                best = val
                best_t = T
        G[S] = best
        A[S] = best_t
    return G_arr, A_arr


cdef int64_t _modpow(int64_t a, int64_t e, int64_t p):
    cdef int64_t r = 1
    a %= p
    while e > 0:
        if e & 1:
            r = (r * a) % p
        a = (a * a) % p
        e >>= 1
    return r


def basic_line_batch(const int64_t[::1] xs, const int64_t[::1] ys, const uint8_t[::1] labels,
                     Py_ssize_t t, Py_ssize_t ell, int64_t p):
    """Run the line basic learner on ell consecutive blocks of t samples.

    Codes: 0 = zero, 1 + x*p + y = point, 1 + p*p + a*p + b = line.
    The second array flags blocks whose positives fit the output.
    """
    codes_arr = np.zeros(ell, dtype=np.int64)
    ok_arr = np.ones(ell, dtype=np.uint8)
    cdef int64_t[::1] codes = codes_arr
    cdef uint8_t[::1] ok = ok_arr
    cdef Py_ssize_t j, i, base, first, second
    cdef int64_t x1, y1, x2, y2, a, b, dx
    for j in range(ell):
        base = j * t
        first = -1
        second = -1
        for i in range(base, base + t):
            if labels[i]:
                if first < 0:
                    first = i
                elif xs[i] != xs[first] or ys[i] != ys[first]:
                    second = i
                    break
        if first < 0:
            codes[j] = 0
            continue
        x1 = xs[first]
        y1 = ys[first]
        if second < 0:
            codes[j] = 1 + x1 * p + y1
            continue
        x2 = xs[second]
        y2 = ys[second]
        if x1 == x2:
            codes[j] = 1 + x1 * p + y1
            ok[j] = 0
            continue
        dx = ((x2 - x1) % p + p) % p
        a = ((((y2 - y1) % p + p) % p) * _modpow(dx, p - 2, p)) % p
        b = ((y1 - a * x1) % p + p) % p
        codes[j] = 1 + p * p + a * p + b
        for i in range(second + 1, base + t):
            if labels[i] and ((a * xs[i] + b - ys[i]) % p + p) % p != 0:
                ok[j] = 0
                break
    return codes_arr, ok_arr
