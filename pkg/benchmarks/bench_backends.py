#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel on a medium-size workload with both backends and
prints the wall times and speedups.  Results are identical between
backands up to floating-point summation order; the assertion below
checks that as well.

Usage: python benchmarks/bench_backends.py
"""

import time

import numpy as np

from cavsqueeze import kernels, moments, oracle, qnd_exact
from cavsqueeze.params import from_reduced


def timeit(fn, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_moments(backend):
    eff = from_reduced(10**4, 1.0, 1.0, 0.5, 0.0, 0.4)
    return moments.simulate(eff, 0.2, dt=2e-6, seed=42, n_out=101,
                            backend=backend)


def bench_qnd(backend):
    eff = from_reduced(100, 1.0, 1.0, 0.0, 0.0, 0.5)
    return qnd_exact.simulate_trajectory(eff, 100, 2.0, seed=7, n_out=101,
                                         backend=backend)


def bench_oracle(backend):
    eff = from_reduced(6, 2.0, 0.5, 0.3, 1.0, 0.5)
    ops = oracle.build_operators(6)
    rho0 = oracle.coherent_x_state(ops)
    return oracle.evolve_sme(rho0, eff, ops, 0.2, seed=3, n_out=3,
                             backend=backend, check=False)


def main():
    if "compiled" not in kernels.available_backends():
        print("compiled extension not available; nothing to compare")
        return
    print(f"{'kernel':<28}{'compiled':>12}{'python':>12}{'speedup':>10}")
    cases = [
        ("moment trajectory (100k)", bench_moments,
         lambda r: (r.v_zz, r.z, r.q)),
        ("qnd n* trajectory (21k)", bench_qnd,
         lambda r: (r.n_star, r.Sz2)),
        ("oracle SME (N=6, 1.8k)", bench_oracle,
         lambda r: tuple(r.rhos)),
    ]
    for name, fn, extract in cases:
        t_c, r_c = timeit(lambda: fn("compiled"))
        t_p, r_p = timeit(lambda: fn("python"), repeat=1)
        for a, b in zip(extract(r_c), extract(r_p)):
            assert np.allclose(a, b, rtol=1e-9, atol=1e-12), name
        print(f"{name:<28}{t_c:>10.3f}s{t_p:>10.3f}s{t_p / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
