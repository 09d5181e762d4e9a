#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel on representative workloads with both backends and
prints a timing table. The compiled extension is optional; if it is not
built, only the fallback column is shown.
"""

from __future__ import annotations

import time

import numpy as np

from peeraudit._kernels import _fallback

try:
    from peeraudit._kernels import _speedups
except ImportError:
    _speedups = None


def _time(fn, *args, repeat: int = 5) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(0)

    probs = rng.uniform(0.01, 0.6, size=2000)
    yield "pb_upper_tail (m=2000)", "pb_upper_tail", (probs, 600)

    n, m = 40, 200
    cell_p = rng.uniform(0.02, 0.5, size=(n, m))
    entries = (rng.random((n, m)) < cell_p).astype(np.int64)
    cooc = entries @ entries.T
    yield "dyad_pvalues (40 children x 200 reports)", "dyad_pvalues", (cell_p, cooc)

    size = 12
    net = (rng.random((size, size)) < 0.35).astype(np.int64)
    net = np.triu(net, 1)
    net = net + net.T
    yield "exact_partition_dp (n=12)", "exact_partition_dp", (net,)


def main() -> None:
    header = f"{'workload':45s} {'fallback':>12s} {'compiled':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for label, name, args in workloads():
        t_py = _time(getattr(_fallback, name), *args)
        if _speedups is None:
            print(f"{label:45s} {t_py * 1e3:10.2f}ms {'n/a':>12s} {'n/a':>9s}")
            continue
        t_c = _time(getattr(_speedups, name), *args)
        print(
            f"{label:45s} {t_py * 1e3:10.2f}ms {t_c * 1e3:10.2f}ms "
            f"{t_py / t_c:8.1f}x"
        )


if __name__ == "__main__":
    main()
