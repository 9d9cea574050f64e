"""Time the compiled and pure-Python CRP district kernels on the same inputs.

Usage: python3 benchmarks/bench_crp.py [--electors N] [--districts S] [--repeat R]
"""
import argparse
import time

import numpy as np

from electsim import _backend


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--electors", type=int, default=1_000_000)
    p.add_argument("--districts", type=int, default=100)
    p.add_argument("--communities", type=int, default=12)
    p.add_argument("--alpha", type=float, default=0.9)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    g = np.random.default_rng(0)
    comm = g.integers(0, args.communities, args.electors).astype(np.int64)
    ub, up = g.random(args.electors), g.random(args.electors)
    call = (comm, args.districts, args.communities, args.alpha, ub, up)

    print(f"N={args.electors} S={args.districts} C={args.communities} alpha={args.alpha}")
    t_py, out_py = best_of(lambda: _backend.crp_assign_python(*call), args.repeat)
    print(f"python   {t_py:8.3f} s")
    if _backend.crp_assign_compiled is None:
        print("compiled kernel not built; rebuild with `pip install --no-build-isolation -e .`")
        return
    t_c, out_c = best_of(lambda: _backend.crp_assign_compiled(*call), args.repeat)
    print(f"compiled {t_c:8.3f} s   speedup x{t_py / t_c:.0f}")
    print("identical output:", bool(np.array_equal(out_py, out_c)))


if __name__ == "__main__":
    main()
