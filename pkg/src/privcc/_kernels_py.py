"""Numpy versions of the compiled kernels, used when the extension is not built."""

import numpy as np


def _submasks(mask: int) -> np.ndarray:
    bits = [i for i in range(mask.bit_length()) if (mask >> i) & 1]
    ar = np.arange(1 << len(bits), dtype=np.int64)
    out = np.zeros_like(ar)
    for j, pos in enumerate(bits):
        out |= ((ar >> j) & 1) << pos
    return out


def minplus_square(F):
    F = np.ascontiguousarray(F, dtype=np.float64)
    size = len(F)
    full = size - 1
    G = np.full(size, np.inf)
    A = np.zeros(size, dtype=np.int64)
    G[0] = 0.0
    # visit T in decreasing order so that strict improvement keeps the largest T
    for T in range(full, 0, -1):
        low = T & -T
        allowed = full & ~T & ~((low << 1) - 1)
        R = _submasks(allowed)
        S = T | R
        val = F[T] + F[R]
        better = val < G[S]
        G[S[better]] = val[better]
        A[S[better]] = T
    return G, A


def basic_line_batch(xs, ys, labels, t, ell, p):
    X = np.asarray(xs, dtype=np.int64)[: t * ell].reshape(ell, t)
    Y = np.asarray(ys, dtype=np.int64)[: t * ell].reshape(ell, t)
    L = np.asarray(labels, dtype=bool)[: t * ell].reshape(ell, t)
    rows = np.arange(ell)
    has = L.any(axis=1)
    first = L.argmax(axis=1)
    x1, y1 = X[rows, first], Y[rows, first]
    other = L & ((X != x1[:, None]) | (Y != y1[:, None]))
    has2 = other.any(axis=1)
    second = other.argmax(axis=1)
    x2, y2 = X[rows, second], Y[rows, second]
    vertical = has2 & (x2 == x1)
    inv = np.array([pow(int(i), p - 2, p) if i else 0 for i in range(p)], dtype=np.int64)
    a = ((y2 - y1) % p) * inv[(x2 - x1) % p] % p
    b = (y1 - a * x1) % p
    codes = np.zeros(ell, dtype=np.int64)
    point = has & (~has2 | vertical)
    line = has2 & ~vertical
    codes[point] = 1 + x1[point] * p + y1[point]
    codes[line] = 1 + p * p + a[line] * p + b[line]
    on_line = ((a[:, None] * X + b[:, None] - Y) % p) == 0
    ok = np.ones(ell, dtype=np.uint8)
    ok[vertical] = 0
    bad_line = line & np.any(L & ~on_line, axis=1)
    ok[bad_line] = 0
    return codes, ok
