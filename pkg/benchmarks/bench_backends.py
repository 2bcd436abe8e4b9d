"""Timing comparison between the compiled core and the pure NumPy fallback.

Run:  python benchmarks/bench_backends.py

The two hot kernels are the stopping-time cube selection (dominates the
randomized decomposition stress suite) and the scalar-kernel quadrature
accumulation (dominates the duality and proof-identity checks).
"""

import math
import time

import numpy as np

from volterra_cz import _purepy

try:
    from volterra_cz import _core
except ImportError:
    _core = None


def best_of(fn, repeats=5):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workload_selection(N=4096, batches=200):
    rng = np.random.default_rng(0)
    h = 1.0 / N
    cases = []
    for _ in range(batches):
        # sparse heavy-tailed cell values with alpha between the mean and
        # the peaks: many maximal bad cubes scattered across levels
        values = np.exp(rng.normal(0.0, 1.5, size=N)) * (rng.random(N) < 0.3)
        c = np.ascontiguousarray(values * h)
        alpha = 4.0 * float(values.mean())
        cases.append((c, alpha))

    def run(impl):
        def inner():
            for c, alpha in cases:
                impl.select_bad_cubes(c, h, alpha)
        return inner
    return "cube selection (N=4096 x200)", run


def workload_quadrature(M=512, order=32, reps=400):
    rng = np.random.default_rng(1)
    h = 1.0 / M
    lefts = np.arange(M) * h
    coeffs = rng.normal(size=M)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    t = 1.0 + 3.0 * h

    def run(impl):
        def inner():
            for _ in range(reps):
                impl.model_kernel_cell_sums(t, lefts, h, coeffs, nodes,
                                            weights, math.nan)
        return inner
    return f"scalar quadrature (M={M}, q={order} x{reps})", run


def main():
    if _core is None:
        print("compiled core not built; showing pure-NumPy timings only")
    rows = []
    for name, make in (workload_selection(), workload_quadrature()):
        pure = best_of(make(_purepy))
        if _core is not None:
            fast = best_of(make(_core))
            rows.append((name, pure, fast, pure / fast))
        else:
            rows.append((name, pure, None, None))
    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'pure [s]':>10}  {'compiled [s]':>13}  {'speedup':>8}")
    for name, pure, fast, speed in rows:
        if fast is None:
            print(f"{name:<{width}}  {pure:>10.4f}  {'-':>13}  {'-':>8}")
        else:
            print(f"{name:<{width}}  {pure:>10.4f}  {fast:>13.4f}  {speed:>7.1f}x")


if __name__ == "__main__":
    main()
