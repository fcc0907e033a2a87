#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Usage:
    python3 benchmarks/bench_kernels.py [--quick]

The active backend for the library is chosen via SEQLCD_BACKEND; this script
ignores that and times both implementations directly.
"""

import argparse
import time

import numpy as np

from seqlcd import _kernels as K


def _time(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def _offsets(velocities, d_s):
    return np.array(
        [[int(np.floor(v * t + 0.5)) for t in range(d_s + 1)] for v in velocities],
        dtype=np.int64,
    )


def bench_pairwise(sizes, repeats):
    rng = np.random.default_rng(0)
    print("\npairwise distance kernels (ref x test, dim)")
    print(f"{'size':>22} {'metric':>10} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for m, n, dim in sizes:
        ref = rng.normal(size=(m, dim))
        test = rng.normal(size=(n, dim))
        out = np.empty((m, n))
        for name, np_fn, nb_fn in (
            ("sad", K.pairwise_sad_numpy, getattr(K, "pairwise_sad_numba", None)),
            ("euclid_sq", K.pairwise_euclid_sq_numpy,
             getattr(K, "pairwise_euclid_sq_numba", None)),
        ):
            t_np = _time(np_fn, ref, test, out, 0, m, repeats=repeats)
            if nb_fn is None:
                print(f"{m}x{n}@{dim:>5} {name:>10} {t_np*1e3:9.1f}ms {'n/a':>10}")
                continue
            nb_fn(ref[:2], test[:2], out[:2, :2], 0, 2)  # compile outside timing
            t_nb = _time(nb_fn, ref, test, out, 0, m, repeats=repeats)
            print(
                f"{f'{m}x{n}':>15}@{dim:<5} {name:>10} {t_np*1e3:9.1f}ms "
                f"{t_nb*1e3:9.1f}ms {t_np/t_nb:8.1f}x"
            )


def bench_enhance(sizes, repeats):
    rng = np.random.default_rng(1)
    print("\nlocal enhancement kernel (window radius 10)")
    print(f"{'size':>22} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for m, n in sizes:
        d = rng.uniform(0, 100, size=(m, n))
        out = np.empty_like(d)
        t_np = _time(K.enhance_columns_numpy, d, 10, 1e-6, out, 0, n, repeats=repeats)
        nb_fn = getattr(K, "enhance_columns_numba", None)
        if nb_fn is None:
            print(f"{f'{m}x{n}':>22} {t_np*1e3:9.1f}ms {'n/a':>10}")
            continue
        nb_fn(d[:5, :2], 1, 1e-6, out[:5, :2], 0, 2)
        t_nb = _time(nb_fn, d, 10, 1e-6, out, 0, n, repeats=repeats)
        print(f"{f'{m}x{n}':>22} {t_np*1e3:9.1f}ms {t_nb*1e3:9.1f}ms {t_np/t_nb:8.1f}x")


def bench_routes(sizes, repeats):
    rng = np.random.default_rng(2)
    d_s = 10
    offsets = _offsets([0.8, 0.9, 1.0, 1.1], d_s)
    print("\nroute search kernel (d_s=10, 4 velocities)")
    print(f"{'size':>22} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for m, n in sizes:
        dhat = rng.normal(size=(m, n))
        score = np.full(n, np.inf)
        s = np.zeros(n, np.int64)
        v = np.zeros(n, np.int64)
        t_np = _time(K.best_routes_numpy, dhat, offsets, d_s, d_s, n, score, s, v,
                     repeats=repeats)
        nb_fn = getattr(K, "best_routes_numba", None)
        if nb_fn is None:
            print(f"{f'{m}x{n}':>22} {t_np*1e3:9.1f}ms {'n/a':>10}")
            continue
        nb_fn(dhat, offsets, d_s, d_s, d_s + 2, score, s, v)
        t_nb = _time(nb_fn, dhat, offsets, d_s, d_s, n, score, s, v, repeats=repeats)
        print(f"{f'{m}x{n}':>22} {t_np*1e3:9.1f}ms {t_nb*1e3:9.1f}ms {t_np/t_nb:8.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes, 1 repeat")
    args = parser.parse_args()

    if not K._have_numba:
        print("numba is not importable; only the numpy fallback will be timed")

    repeats = 1 if args.quick else 3
    if args.quick:
        pairwise_sizes = [(200, 200, 256), (300, 300, 1024)]
        matrix_sizes = [(300, 300), (500, 500)]
    else:
        pairwise_sizes = [(200, 200, 256), (500, 500, 1024), (1000, 1000, 1024)]
        matrix_sizes = [(300, 300), (1000, 1000)]

    bench_pairwise(pairwise_sizes, repeats)
    bench_enhance(matrix_sizes, repeats)
    bench_routes(matrix_sizes, repeats)


if __name__ == "__main__":
    main()
