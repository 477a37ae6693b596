#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Run from the repository root:

    python benchmarks/kernel_benchmark.py [--sizes 100,1000,3000]

Covers the three hot paths: the pairwise force/energy sum (the anneal inner
loop), the per-ion field-gradient tensors, and one drive period of the
time-domain integrator. The numpy column is what you get with
IONCLOCK_DISABLE_NUMBA=1.
"""

import argparse
import math
import time

import numpy as np

from ionclock import kernels


def best_of(fn, repeats=3, min_time=0.05):
    """Best wall time per call, with an auto-scaled inner loop."""
    fn()  # warm-up / JIT
    calls = 1
    while True:
        start = time.perf_counter()
        for _ in range(calls):
            fn()
        elapsed = time.perf_counter() - start
        if elapsed > min_time:
            break
        calls *= 4
    best = elapsed / calls
    for _ in range(repeats - 1):
        start = time.perf_counter()
        for _ in range(calls):
            fn()
        best = min(best, (time.perf_counter() - start) / calls)
    return best


def cloud(n, seed=1):
    rng = np.random.default_rng(seed)
    return np.ascontiguousarray(rng.normal(size=(n, 3)) * n ** (1 / 3))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="100,1000,3000")
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",")]

    if not kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy path is available")
        return

    curvature = np.eye(3)
    print(f"{'kernel':<28}{'N':>6}{'numpy':>12}{'numba':>12}{'speedup':>9}")
    for n in sizes:
        pos = cloud(n)
        t_np = best_of(lambda: kernels.force_energy_numpy(pos, curvature))
        t_nb = best_of(lambda: kernels.force_energy_numba(pos, curvature))
        print(f"{'force + energy':<28}{n:>6}{t_np * 1e3:>10.2f}ms"
              f"{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>8.1f}x")
    for n in sizes:
        pos = cloud(n)
        t_np = best_of(lambda: kernels.quadrupole_tensors_numpy(pos))
        t_nb = best_of(lambda: kernels.quadrupole_tensors_numba(pos))
        print(f"{'field-gradient tensors':<28}{n:>6}{t_np * 1e3:>10.2f}ms"
              f"{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>8.1f}x")

    q = cloud(3, seed=2) * 0.3
    v = np.zeros_like(q)
    sdiag = np.array([-0.5, -0.5, 1.0])
    rfdiag = np.array([math.sqrt(3), -math.sqrt(3), 0.0])
    fext = np.zeros(3)
    dt = math.pi / 400
    t_np = best_of(lambda: kernels.rf_period_map_numpy(
        q, v, 0.0, 400, dt, 0.05, sdiag, rfdiag, fext))
    t_nb = best_of(lambda: kernels.rf_period_map_numba(
        q, v, 0.0, 400, dt, 0.05, sdiag, rfdiag, fext))
    print(f"{'drive period, N=3':<28}{'':>6}{t_np * 1e3:>10.2f}ms"
          f"{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
