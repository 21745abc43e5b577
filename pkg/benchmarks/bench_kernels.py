"""Benchmark the compiled kernels against the numpy fallback.

Run:  python benchmarks/bench_kernels.py [--quick]

Times the four hot paths on synthetic workloads and prints best-of-5
wall times per backend plus the speedup of the compiled path. Expect the
random-stream kernels to favor the compiled path clearly, while the
moment/score kernels are close: the fallback rides BLAS there.
"""

import argparse
import time

import numpy as np

from tdtk._kernels import available_backends


def best_of(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def build_workloads(scale):
    n_draws = int(2_000_000 * scale)
    n_pixels = int(200_000 * scale)
    bands = 8
    rng = np.random.default_rng(0)
    z = rng.normal(size=(n_pixels, bands))
    chol = np.linalg.cholesky(np.eye(bands) + 0.1)
    mean = rng.normal(size=bands)
    x = rng.normal(size=(n_pixels, bands)) + mean
    w = rng.normal(size=bands)
    return {
        "normal_stream (%.1fM draws)" % (n_draws / 1e6):
            lambda impl: impl.normal_stream(42, 0, 0, n_draws),
        "color_pixels (%dk x %d)" % (n_pixels // 1000, bands):
            lambda impl: impl.color_pixels(z, chol, mean),
        "accumulate_moments (%dk x %d)" % (n_pixels // 1000, bands):
            lambda impl: impl.accumulate_moments(x),
        "detection_scores (%dk x %d)" % (n_pixels // 1000, bands):
            lambda impl: impl.detection_scores(x, w, mean),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller workloads, fewer repeats")
    args = parser.parse_args()

    impls = available_backends()
    if "cython" not in impls:
        print("note: compiled backend unavailable; timing the fallback only")
    workloads = build_workloads(0.1 if args.quick else 1.0)
    repeats = 3 if args.quick else 5

    width = max(len(name) for name in workloads)
    header = f"{'kernel':<{width}}  " + "".join(f"{n:>12}" for n in impls)
    if "cython" in impls:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, call in workloads.items():
        times = {n: best_of(lambda impl=impl: call(impl), repeats)
                 for n, impl in impls.items()}
        row = f"{name:<{width}}  " + "".join(
            f"{times[n] * 1e3:>10.2f}ms" for n in impls)
        if "cython" in impls:
            row += f"{times['numpy'] / times['cython']:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
