"""Compare the compiled and numpy Gram assembly cores.

    python benchmarks/bench_core.py [--sizes 256 1024 2048] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from rkhsmercer import KernelSpec, _core_py

try:
    from rkhsmercer import _core
except ImportError:
    _core = None

KERNELS = {
    "gaussian": KernelSpec.gaussian(0.3),
    "laplace": KernelSpec.laplace(0.3),
    "brownian": KernelSpec.brownian(),
    "block": KernelSpec.block([3.0, 2.0, 1.0, 0.5]),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 2048])
    parser.add_argument("--dim", type=int, default=1)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _core is None:
        print("compiled core not built; only the numpy fallback is timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<10}{'n':>6}{'numpy ms':>12}{'cython ms':>12}{'speedup':>9}")
    for name, kernel in KERNELS.items():
        code, params = kernel._code_params()
        dim = 1 if name == "block" else args.dim
        for n in args.sizes:
            lo, hi = (0.0, 8.0) if name == "block" else (0.0, 1.0)
            X = rng.uniform(lo, hi, (n, dim))
            t_py = min(timeit.repeat(lambda: _core_py.gram_closed_form(code, params, X, X),
                                     number=1, repeat=args.repeat)) * 1e3
            if _core is None:
                print(f"{name:<10}{n:>6}{t_py:>12.2f}{'-':>12}{'-':>9}")
                continue
            t_cy = min(timeit.repeat(lambda: _core.gram_closed_form(code, params, X, X),
                                     number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<10}{n:>6}{t_py:>12.2f}{t_cy:>12.2f}{t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
