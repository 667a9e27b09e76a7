# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Rank of an integer matrix modulo a word-sized prime."""

cimport cython
from libc.stdlib cimport malloc, free


cdef long long _inv(long long a, long long p):
    cdef long long r0 = p, r1 = a % p, t0 = 0, t1 = 1, q, tmp
    while r1:
        q = r0 // r1
        tmp = r0 - q * r1
        r0 = r1
        r1 = tmp
        tmp = t0 - q * t1
        t0 = t1
        t1 = tmp
    return t0 % p if t0 >= 0 else t0 % p + p


def rank_mod_p(long long[:, ::1] m, long long p):
    """Rank of ``m`` over GF(p); entries must already lie in [0, p) and p < 2**31."""
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef Py_ssize_t i, j, k, piv, rank = 0
    cdef long long f, inv
    cdef long long *a = <long long *> malloc(rows * cols * sizeof(long long))
    if a == NULL:
        raise MemoryError()
    try:
        for i in range(rows):
            for j in range(cols):
                a[i * cols + j] = m[i, j]
        for j in range(cols):
            if rank == rows:
                break
            piv = -1
            for i in range(rank, rows):
                if a[i * cols + j]:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != rank:
                for k in range(cols):
                    f = a[piv * cols + k]
                    a[piv * cols + k] = a[rank * cols + k]
                    a[rank * cols + k] = f
            inv = _inv(a[rank * cols + j], p)
            for k in range(j, cols):
                a[rank * cols + k] = a[rank * cols + k] * inv % p
            for i in range(rank + 1, rows):
                f = a[i * cols + j]
                if f:
                    for k in range(j, cols):
                        a[i * cols + k] = (a[i * cols + k] - f * a[rank * cols + k]) % p
                        if a[i * cols + k] < 0:
                            a[i * cols + k] += p
            rank += 1
        return rank
    finally:
        free(a)
