"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 14] [--repeat 3]
"""

import argparse
import time

import numpy as np

from privcc import _kernels_py

try:
    from privcc import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench(n, repeat):
    rng = np.random.default_rng(0)
    F = rng.random(1 << n)
    F[0] = 0.0
    p, t, ell = 101, 64, 150
    idx = rng.integers(0, p * p, size=t * ell)
    xs, ys = idx // p, idx % p
    labels = (ys == (3 * xs + 7) % p).astype(np.uint8)
    cases = [
        (f"minplus_square n={n}", lambda m: m.minplus_square(F)),
        (f"basic_line_batch t={t} ell={ell}", lambda m: m.basic_line_batch(xs, ys, labels, t, ell, p)),
    ]
    rows = []
    for name, call in cases:
        py_t, py_out = best_of(lambda: call(_kernels_py), repeat)
        if _kernels is None:
            rows.append((name, None, py_t, None))
            continue
        cy_t, cy_out = best_of(lambda: call(_kernels), repeat)
        same = all(np.array_equal(a, b) for a, b in zip(cy_out, py_out))
        rows.append((name, cy_t, py_t, same))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=14)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'kernel':36s} {'cython s':>10s} {'numpy s':>10s} {'speedup':>8s} same")
    for name, cy, py, same in bench(args.n, args.repeat):
        if cy is None:
            print(f"{name:36s} {'n/a':>10s} {py:10.4f} {'':>8s} -")
        else:
            print(f"{name:36s} {cy:10.4f} {py:10.4f} {py / cy:8.1f} {same}")


if __name__ == "__main__":
    main()
