"""Time the compiled stencil kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 512] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from bdflow import kernels


def cases(n):
    x = np.linspace(-1.0, 1.0, n)
    rho = np.maximum(1.0 - x * x, 0.0) + 1e-3
    mom = 0.1 * np.sin(np.pi * x) * rho
    rho2 = np.outer(rho, rho)
    h = 2.0 / n
    return {
        "flux_laplacian 1d": lambda k: k.flux_laplacian(rho, (h,), False),
        "flux_laplacian 2d": lambda k: k.flux_laplacian(rho2, (h, h), False),
        "pme_step_power 1d": lambda k: k.pme_step_power(rho, 0.5, 2.0, 1e-6, (h,), False),
        "pme_step_power 2d": lambda k: k.pme_step_power(rho2, 0.5, 2.0, 1e-6, (h, h), False),
        "cns_step_1d": lambda k: k.cns_step_1d(rho, mom, 0.5, 2.0, 0.1, 1.0, 2.0, 1e-6, h, False, 1e-12),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    compiled = kernels.compiled()
    if compiled is None:
        print("compiled kernels unavailable; only the fallback can be timed")
    print(f"{'kernel':<22}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for name, fn in cases(args.n).items():
        number = 200
        t_py = min(timeit.repeat(lambda: fn(kernels.python), number=number, repeat=args.repeat)) / number
        if compiled is None:
            print(f"{name:<22}{t_py * 1e6:>14.1f}{'-':>14}{'-':>10}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(compiled), number=number, repeat=args.repeat)) / number
        print(f"{name:<22}{t_py * 1e6:>14.1f}{t_cy * 1e6:>14.1f}{t_py / t_cy:>10.1f}")


if __name__ == "__main__":
    main()
