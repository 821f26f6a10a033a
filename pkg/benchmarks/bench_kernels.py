#!/usr/bin/env python3
"""Benchmark the numba and numpy kernel backends against each other.

Times the two hot kernels (condensed pairwise distances, minimax cut-off
scan) and a full adaptive run, for each backend, and prints a comparison
table. The first numba call is excluded from timing (JIT compilation).

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 200,800 --features 2,8 --repeats 7
"""
import argparse
import statistics
import time

import numpy as np

import adaptlink as al
from adaptlink import _kernels


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times)


def bench_kernels(sizes, features, repeats):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        for p in features:
            x = rng.standard_normal((n, p))
            per_backend = {}
            for backend in _kernels.VALID_BACKENDS:
                if backend == "numba" and not _kernels._HAVE_NUMBA:
                    continue
                al.set_backend(backend)
                entries = _kernels.pairwise_condensed(x)  # warm-up (JIT compile)
                _kernels.cutoff_from_condensed(entries, n)
                pair_best, _ = best_of(lambda: _kernels.pairwise_condensed(x), repeats)
                cut_best, _ = best_of(
                    lambda: _kernels.cutoff_from_condensed(entries, n), repeats
                )
                per_backend[backend] = (pair_best, cut_best)
            rows.append((n, p, per_backend))
    return rows


def bench_end_to_end(sizes, repeats):
    rng = np.random.default_rng(1)
    rows = []
    for n in sizes:
        data = al.Dataset(
            labels=tuple(f"pt{i}" for i in range(n)),
            values=rng.standard_normal((n, 3)),
            column_names=("a", "b", "c"),
        )
        nd = al.normalize(data)
        per_backend = {}
        for backend in _kernels.VALID_BACKENDS:
            if backend == "numba" and not _kernels._HAVE_NUMBA:
                continue
            al.set_backend(backend)
            al.build_dendrogram(nd)  # warm-up
            best, _ = best_of(lambda: al.build_dendrogram(nd), repeats)
            per_backend[backend] = best
        rows.append((n, per_backend))
    return rows


def fmt(seconds):
    return f"{seconds * 1e3:9.3f} ms"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,400,1000",
                        help="comma-separated point counts (default 100,400,1000)")
    parser.add_argument("--features", default="2,8",
                        help="comma-separated column counts (default 2,8)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions; best time wins (default 5)")
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    features = [int(s) for s in args.features.split(",")]

    original = al.get_backend()
    try:
        print(f"numba available: {_kernels._HAVE_NUMBA}")
        print()
        print(f"{'n':>6} {'p':>3}   {'kernel':<10} {'numba':>12} {'numpy':>12} {'ratio':>7}")
        for n, p, per_backend in bench_kernels(sizes, features, args.repeats):
            nb = per_backend.get("numba")
            np_ = per_backend["numpy"]
            for label, k in (("pairwise", 0), ("cutoff", 1)):
                ratio = f"{np_[k] / nb[k]:6.1f}x" if nb else "    n/a"
                nb_txt = fmt(nb[k]) if nb else "         n/a"
                print(f"{n:>6} {p:>3}   {label:<10} {nb_txt:>12} {fmt(np_[k]):>12} {ratio}")
        print()
        print(f"{'n':>6}       {'full adaptive run':<18} {'numba':>12} {'numpy':>12} {'ratio':>7}")
        for n, per_backend in bench_end_to_end(sizes, args.repeats):
            nb = per_backend.get("numba")
            np_ = per_backend["numpy"]
            ratio = f"{np_ / nb:6.1f}x" if nb else "    n/a"
            nb_txt = fmt(nb) if nb else "         n/a"
            print(f"{n:>6}       {'build_dendrogram':<18} {nb_txt:>12} {fmt(np_):>12} {ratio}")
    finally:
        al.set_backend(original)


if __name__ == "__main__":
    main()
