"""NumPy implementation of the modular rank kernel, used when the compiled module is unavailable."""

from __future__ import annotations

import numpy as np


def rank_mod_p(m: np.ndarray, p: int) -> int:
    a = np.array(m, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for j in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(a[rank:, j])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        inv = pow(int(a[rank, j]), -1, p)
        a[rank] = a[rank] * inv % p
        below = a[rank + 1:, j].copy()
        if below.any():
            a[rank + 1:] = (a[rank + 1:] - np.outer(below, a[rank]) % p) % p
        rank += 1
    return rank
