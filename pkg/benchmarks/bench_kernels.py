"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]
"""

import argparse
import time

import numpy as np

from cdsm import _pykernels
from cdsm.gridworld import SYRooms

try:
    from cdsm import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def walk_case(n):
    world = SYRooms(seed=1)
    grid = world.grid
    u = np.random.default_rng(0).random(n)
    r, c = world.pos

    def run(mod):
        rows = np.empty(n, dtype=np.int64)
        cols = np.empty(n, dtype=np.int64)
        mod.walk(grid, r, c, u, rows, cols, -1, -1, -1, -1)
    return f"walk {n} steps", run


def jacobi_case(n):
    a = np.random.default_rng(n).standard_normal((n, n))
    s = (a + a.T) / 2

    def run(mod):
        mod.jacobi_eigh(s.copy(), 1e-14, 100)
    return f"jacobi_eigh {n}x{n}", run


def ward_case(n):
    x = np.random.default_rng(n).standard_normal((n, 3))
    d = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)

    def run(mod):
        mod.ward_merge(d.copy(), 2)
    return f"ward_merge {n} points", run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args()
    if args.quick:
        cases = [walk_case(20_000), jacobi_case(40), ward_case(100)]
    else:
        cases = [walk_case(1_000_000), jacobi_case(100), jacobi_case(200), ward_case(300), ward_case(650)]
    print(f"{'kernel':<24}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for name, run in cases:
        tp = _best(lambda: run(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:<24}{'n/a':>12}{tp:>12.4f}{'':>10}")
            continue
        tc = _best(lambda: run(_kernels), args.repeat)
        print(f"{name:<24}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
