"""Compare the compiled and NumPy modular-rank kernels.

    python3 benchmarks/bench_modrank.py [--sizes 20 40 80 160] [--repeat 5]

Both kernels must agree on every matrix; the table reports the best of ``repeat`` runs.
"""

import argparse
import timeit

import numpy as np

from tame3 import _kernels
from tame3.certify import PRIME

try:
    from tame3 import _modrank
except ImportError:
    _modrank = None


def matrices(n: int, seed: int):
    rng = np.random.default_rng(seed)
    full = rng.integers(0, PRIME, size=(n, n), dtype=np.int64)
    # Rank n // 2: a product of thin factors, reduced mod p.
    a = rng.integers(0, 1000, size=(n, n // 2), dtype=np.int64)
    b = rng.integers(0, 1000, size=(n // 2, n), dtype=np.int64)
    low = (a @ b) % PRIME
    return [np.ascontiguousarray(full), np.ascontiguousarray(low)]


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 80, 160])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _modrank is None:
        print("compiled kernel not built; only the NumPy kernel is available")
    print(f"{'n':>5} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in args.sizes:
        ms = matrices(n, n)
        for m in ms:
            want = _kernels.rank_mod_p(m.copy(), PRIME)
            if _modrank is not None:
                got = _modrank.rank_mod_p(m.copy(), PRIME)
                assert got == want, (n, got, want)
        t_np = min(timeit.repeat(lambda: [_kernels.rank_mod_p(m.copy(), PRIME) for m in ms],
                                 number=1, repeat=args.repeat)) * 1e3
        if _modrank is None:
            print(f"{n:>5} {t_np:>10.3f} {'-':>10} {'-':>8}")
            continue
        t_cy = min(timeit.repeat(lambda: [_modrank.rank_mod_p(m.copy(), PRIME) for m in ms],
                                 number=1, repeat=args.repeat)) * 1e3
        print(f"{n:>5} {t_np:>10.3f} {t_cy:>10.3f} {t_np / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
