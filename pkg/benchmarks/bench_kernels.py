"""Compare the compiled and pure-Python level-sum backends.

Run with ``python benchmarks/bench_kernels.py [--sizes 1e3,1e5,1e6] [--repeat 5]``.
Reports the best wall time per call, the speedup, and the largest relative
difference between the two backends' sums.
"""

import argparse
import time

import numpy as np

from qmaxent import kernels
from qmaxent.spectra import oscillator, uniform_grid
from qmaxent.solver import solve


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_kernel(n, repeat):
    e = np.arange(n, dtype=float)
    d = e.copy()
    g = np.ones(n)
    args = (e, d, g, 0.5 * n ** 0.5, 1.0 / n, 1.0 / (0.7 - 1.0), False, True, 0.7)
    times, sums = {}, {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        times[name], sums[name] = _best(lambda: kernels.level_sums(*args), repeat)
    return times, sums


def bench_solve(repeat):
    """End-to-end solves that stay on the materialized path."""
    cases = [(uniform_grid(6001, 30.0, 1), 1.0, 0.75), (oscillator(2**20, 1.0), 1.5, 0.6)]
    times = {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        times[name], _ = _best(lambda: [solve(sp, U, q) for sp, U, q in cases], repeat)
    return times


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1e3,1e4,1e5,1e6")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    initial = kernels.BACKEND
    print(f"backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend is timed")
    print(f"{'levels':>10} " + " ".join(f"{b + ' [ms]':>15}" for b in backends)
          + f" {'speedup':>9} {'max rel diff':>13}")
    try:
        for n in (int(float(s)) for s in args.sizes.split(",")):
            times, sums = bench_kernel(n, args.repeat)
            row = f"{n:>10} " + " ".join(f"{1e3 * times[b]:>15.3f}" for b in backends)
            if len(backends) == 2:
                a, b = np.array(sums["compiled"]), np.array(sums["python"])
                diff = np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))
                row += f" {times['python'] / times['compiled']:>9.1f} {diff:>13.2e}"
            print(row)
        t = bench_solve(max(1, args.repeat // 2))
        line = "end-to-end solves: " + ", ".join(f"{b} {1e3 * t[b]:.1f} ms" for b in backends)
        if len(backends) == 2:
            line += f" (speedup {t['python'] / t['compiled']:.1f}x)"
        print(line)
    finally:
        kernels.set_backend(initial)


if __name__ == "__main__":
    main()
