"""Micro-benchmark: compiled kernels vs the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from cascade_msprt import _pykernels
from cascade_msprt import graph as G

try:
    from cascade_msprt import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_segment_sums(backend, repeat):
    rng = np.random.default_rng(0)
    n = 100_000
    values = rng.standard_normal(n)
    sizes = rng.integers(1, 200, size=5000)
    flat = rng.integers(0, n, size=sizes.sum()).astype(np.int32)
    offsets = np.zeros(5001, dtype=np.int64)
    offsets[1:] = np.cumsum(sizes)
    return timeit(lambda: backend.segment_sums(values, flat, offsets), repeat)


def bench_truncated_bfs(backend, repeat):
    g = G.build_regular_tree(3, 15)  # 32767 vertices
    def run():
        for src in (0, 100, 5000):
            backend.truncated_bfs(g.indptr, g.indices, src, 14)
    return timeit(run, repeat)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = [("numpy-fallback", _pykernels)]
    if _ckernels is not None:
        backends.insert(0, ("compiled", _ckernels))
    else:
        print("compiled extension not available; benchmarking fallback only")
    print(f"{'kernel':<16}" + "".join(f"{name:>16}" for name, _ in backends) + f"{'speedup':>10}")
    for label, bench in (("segment_sums", bench_segment_sums),
                         ("truncated_bfs", bench_truncated_bfs)):
        times = [bench(mod, args.repeat) for _, mod in backends]
        cols = "".join(f"{t * 1e3:>13.2f} ms" for t in times)
        speed = f"{times[-1] / times[0]:>9.1f}x" if len(times) == 2 else ""
        print(f"{label:<16}{cols}{speed}")


if __name__ == "__main__":
    main()
