"""Time the compiled pair kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --sizes 20 50 100 200
"""
import argparse
import timeit

import numpy as np

from breathmode import _pykernels

try:
    from breathmode import _ckernels
except ImportError:
    _ckernels = None


def bench(fn, pos, lam, repeat):
    timer = timeit.Timer(lambda: fn(pos, lam))
    loops, _ = timer.autorange()
    return min(timer.repeat(repeat, loops)) / loops


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 50, 100, 200])
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    print(f"{'N':>5} {'kernel':>16} {'numpy [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for n in args.sizes:
        pos = rng.normal(size=(n, args.dim)) * n ** 0.5
        for name in ("energy_gradient", "hessian"):
            t_py = bench(getattr(_pykernels, name), pos, 1.0, args.repeat)
            if _ckernels is None:
                print(f"{n:>5} {name:>16} {1e3 * t_py:>12.4f}")
                continue
            t_c = bench(getattr(_ckernels, name), pos, 1.0, args.repeat)
            print(f"{n:>5} {name:>16} {1e3 * t_py:>12.4f} {1e3 * t_c:>12.4f} {t_py / t_c:>8.1f}")


if __name__ == "__main__":
    main()
