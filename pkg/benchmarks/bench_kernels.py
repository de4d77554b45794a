#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--size HxW] [--repeat N]
"""

import argparse
import time

import numpy as np

from coloc import kernels


def timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", default="120x160")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    h, w = (int(x) for x in args.size.split("x"))
    rng = np.random.default_rng(0)

    edges = rng.random((h, w)) < 0.05
    src = rng.random((h, w, 3)).astype(np.float32)
    dst = rng.random((h, w, 3)).astype(np.float32)
    caps = (rng.integers(0, 1 << 26, (h, w)), rng.integers(0, 1 << 26, (h, w)),
            rng.integers(0, 1 << 26, (h, w - 1)), rng.integers(0, 1 << 26, (h - 1, w)),
            rng.integers(0, 1 << 26, (h - 1, w - 1)), rng.integers(0, 1 << 26, (h - 1, w - 1)))

    cases = {
        "exact_edt": lambda impl: kernels.exact_edt(edges, impl=impl),
        "block_match (8px, +-16)": lambda impl: kernels.block_match(src, dst, 8, 16, impl=impl),
        "block_match (16px, +-48/4)": lambda impl: kernels.block_match(src, dst, 16, 48, 4, impl=impl),
        "grid_mincut": lambda impl: kernels.grid_mincut(*caps, impl=impl),
    }

    impls = kernels.backends()
    print(f"grid {h}x{w}; backends: {', '.join(impls)} (selected: {kernels.BACKEND})")
    header = f"{'kernel':28s}" + "".join(f"{name:>12s}" for name in impls)
    print(header)
    print("-" * len(header))
    for label, fn in cases.items():
        times = {name: timeit(lambda impl=impl: fn(impl), args.repeat)
                 for name, impl in impls.items()}
        row = f"{label:28s}" + "".join(f"{times[name] * 1e3:10.1f} ms" for name in impls)
        if "native" in times and "fallback" in times:
            row += f"   ({times['fallback'] / times['native']:.1f}x)"
        print(row)


if __name__ == "__main__":
    main()
