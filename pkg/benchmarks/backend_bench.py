#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the pure-Python fallback.

Runs the same trajectory workload through both backends, checks that the
jump histories agree, and reports the throughput ratio.

    python3 benchmarks/backend_bench.py [--n 200] [--t-final 3.0]
"""

import argparse
import time

import numpy as np

from pairjump import _kernels
from pairjump.core import PhysicalParams, ket
from pairjump.trajectory import run_trajectory


def run_backend(fn, label, params, n, t_final, dt):
    _kernels.simulate = fn
    # warm up (compilation for the jit path)
    run_trajectory(params, ket("g"), 10 * dt, dt, seed=0)
    t0 = time.perf_counter()
    total_jumps = 0
    for i in range(n):
        rec = run_trajectory(params, ket("g"), t_final, dt, seed=1, stream=i)
        total_jumps += rec.n_jumps
    elapsed = time.perf_counter() - t0
    steps = n * int(round(t_final / dt))
    print(
        f"{label:>6}: {elapsed:8.3f} s   {steps / elapsed / 1e6:7.2f} Msteps/s   "
        f"({total_jumps} jumps)"
    )
    return elapsed, total_jumps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200, help="trajectories per backend")
    ap.add_argument("--t-final", type=float, default=3.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()

    params = PhysicalParams(rabi_1=0.3, rabi_2=0.3, separation=1 / np.pi)
    orig = _kernels.simulate
    try:
        t_py, jumps_py = run_backend(
            _kernels.simulate_py, "numpy", params, args.n, args.t_final, args.dt
        )
        if _kernels.simulate_jit is None:
            print("numba unavailable; nothing to compare")
            return
        t_jit, jumps_jit = run_backend(
            _kernels.simulate_jit, "numba", params, args.n, args.t_final, args.dt
        )
    finally:
        _kernels.simulate = orig
    assert jumps_py == jumps_jit, "backends disagree on the jump count"
    print(f"speedup: {t_py / t_jit:.1f}x")


if __name__ == "__main__":
    main()
