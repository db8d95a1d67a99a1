#!/usr/bin/env python3
"""Benchmark the compiled mutual-reachability MST kernel against the
pure-numpy fallback, and the full clustering stage on top of each.

Usage:
    python benchmarks/bench_kernels.py [--sizes 500,2000,5000] [--dim 5]

The two backends must produce the same spanning tree (checked here for the
narrow dimensions clustering actually uses); the interesting number is the
wall-clock ratio on the O(n^2) Prim loop.
"""

import argparse
import time

import numpy as np

from keyactor._kernels import BACKEND
from keyactor._kernels._fallback import mutual_reachability_mst as python_mst
from keyactor.topics.cluster import core_distances

try:
    from keyactor._kernels._mst import mutual_reachability_mst as compiled_mst
except ImportError:
    compiled_mst = None


def blobs(n, dim, seed):
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(0.0, 0.5, size=(half, dim))
    b = rng.normal(0.0, 0.5, size=(n - half, dim)) + 8.0
    return np.ascontiguousarray(np.vstack([a, b]))


def timed(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="500,2000,5000")
    parser.add_argument("--dim", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"active backend: {BACKEND}")
    if compiled_mst is None:
        print("compiled kernel not built; benchmarking the fallback only")
    header = f"{'n':>7} {'dim':>4} {'python (s)':>12} {'compiled (s)':>13} {'speedup':>8}  tree"
    print(header)
    print("-" * len(header))
    for n in sizes:
        pts = blobs(n, args.dim, seed=1)
        core = core_distances(pts, 10)
        t_py, (e1, w1) = timed(python_mst, pts, core)
        if compiled_mst is None:
            print(f"{n:>7} {args.dim:>4} {t_py:>12.3f} {'-':>13} {'-':>8}")
            continue
        t_c, (e2, w2) = timed(compiled_mst, pts, core)
        same = np.array_equal(e1, e2) and np.array_equal(w1, w2)
        print(f"{n:>7} {args.dim:>4} {t_py:>12.3f} {t_c:>13.3f} {t_py / t_c:>7.1f}x  {'identical' if same else 'DIFFERS'}")
        if not same:
            raise SystemExit("backend outputs diverged")


if __name__ == "__main__":
    main()
