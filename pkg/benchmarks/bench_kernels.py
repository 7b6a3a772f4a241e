"""Numba vs numpy timings for the mixed-representation kernels.

    python3 benchmarks/bench_kernels.py [--n 128 256 512] [--repeat 5]

Both implementations are called directly, so the env flag does not matter
here.  Each row also reports the max-abs disagreement between the two.
"""
import argparse
import time

import numpy as np

from moyalkit import _kernels


def inputs(n, rng):
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    g = rng.normal(size=n) + 1j * rng.normal(size=n)
    K = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return {
        "pair_to_mixed": (f, g),
        "kernel_to_mixed": (K,),
        "mixed_to_kernel": (A, B),
        "twisted_sum": (A, B),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[128, 256, 512])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    # warm up the jit so compile time stays out of the table
    for name, a in inputs(16, rng).items():
        getattr(_kernels.numba_impl, name)(*a)

    print(f"{'kernel':<16}{'n':>6}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}{'max diff':>12}")
    for n in args.n:
        for name, a in inputs(n, rng).items():
            t_np, r_np = best_of(getattr(_kernels.numpy_impl, name), a, args.repeat)
            t_nb, r_nb = best_of(getattr(_kernels.numba_impl, name), a, args.repeat)
            diff = np.abs(np.asarray(r_np) - np.asarray(r_nb)).max()
            print(f"{name:<16}{n:>6}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
