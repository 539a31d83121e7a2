"""Compare the numba and numpy triad-convolution kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Prints the median time of
the bare convolution and of one full right-hand-side evaluation for each
backend, plus the largest difference between their results.
"""
import argparse
import statistics
import time

import numpy as np

from nsgalerkin import kernels, solver
from nsgalerkin.domain import BoxDomain
from nsgalerkin.initial import random_field


def median_time(fn, repeat):
    fn()  # warm-up (includes JIT compilation on first use)
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench(dim, cutoff, repeat):
    domain = BoxDomain(dim, (2 * np.pi,) * dim)
    u = random_field(domain, cutoff, seed=0)
    table = kernels.triad_table(dim, cutoff, cutoff)
    lat, grad = u.lattice(), u.gradient_lattice()
    system = solver.GalerkinSystem(domain, cutoff, 1.0)
    dyn = solver._Dynamics(system)

    rows = {}
    for backend, flag in (("numpy", False), ("numba", True)):
        conv = median_time(lambda: kernels.convolve(lat, grad, table, flag), repeat)
        saved = kernels._accel.USE_NUMBA
        kernels._accel.USE_NUMBA = flag
        try:
            rhs = median_time(lambda: dyn.rhs(u.coeffs), repeat)
        finally:
            kernels._accel.USE_NUMBA = saved
        rows[backend] = (conv, rhs)
    diff = np.abs(kernels.convolve(lat, grad, table, False)
                  - kernels.convolve(lat, grad, table, True)).max()
    print(f"dim={dim} cutoff={cutoff} triads={len(table)}")
    for backend, (conv, rhs) in rows.items():
        print(f"  {backend:6s} convolve {conv * 1e3:9.3f} ms   rhs {rhs * 1e3:9.3f} ms")
    print(f"  speedup convolve x{rows['numpy'][0] / rows['numba'][0]:.1f}, "
          f"max |difference| {diff:.1e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=10)
    args = parser.parse_args()
    for dim, cutoff in ((2, 8), (3, 3), (4, 2), (4, 3)):
        bench(dim, cutoff, args.repeat)


if __name__ == "__main__":
    main()
