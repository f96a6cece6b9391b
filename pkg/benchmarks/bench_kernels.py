"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 32 64 128] [--repeat 5]

Prints one row per (kernel, N) with the best-of-repeat time per call for each
backend and their ratio. Without the compiled extension only the fallback
column is filled.
"""
import argparse
import timeit

import numpy as np

from bispec import _kernels_py, kernels

try:
    from bispec import _kernels as _compiled
except ImportError:
    _compiled = None


def _inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    bf = kernels.bispectrum(rng.standard_normal(n) + 1j * rng.standard_normal(n), impl=_kernels_py)
    mask = (rng.random((n, n)) > 0.1).astype(np.uint8)
    block = np.arange(n, dtype=np.intp)
    return y, bf, mask, block


def _best(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def run(sizes, repeat):
    rows = []
    for n in sizes:
        y, bf, mask, block = _inputs(n)
        calls = {
            "bispectrum": lambda impl: kernels.bispectrum(y, impl=impl),
            "objective": lambda impl: kernels.objective(y, bf, mask, impl=impl),
            "gradient": lambda impl: kernels.gradient(y, bf, mask, block, impl=impl),
        }
        for name, call in calls.items():
            t_py = _best(lambda: call(_kernels_py), repeat)
            t_c = _best(lambda: call(_compiled), repeat) if _compiled else float("nan")
            rows.append((name, n, t_c, t_py))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<11}{'N':>5}{'compiled [us]':>15}{'numpy [us]':>13}{'speedup':>9}")
    for name, n, t_c, t_py in run(args.sizes, args.repeat):
        print(f"{name:<11}{n:>5}{t_c * 1e6:>15.1f}{t_py * 1e6:>13.1f}{t_py / t_c:>9.1f}")


if __name__ == "__main__":
    main()
