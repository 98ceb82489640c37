"""Time the numba and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py --n 100000 --repeat 5
"""
import argparse
import timeit

import numpy as np

from fringetrees import kernels
from fringetrees._accel import HAVE_NUMBA
from fringetrees.harness.config import statistic_from_proportions
from fringetrees.samplers import RandomStream, sample_uniform_batch


def cases(n, seed):
    bn = statistic_from_proportions({0: 0.3, 1: 0.4, 2: 0.3}, n)
    d = sample_uniform_batch(bn, 1, RandomStream(seed))[0]
    bridge = np.random.default_rng(seed).permutation(d)
    target = np.array([2, 0, 0], dtype=np.int64)
    degs, cnts = np.array([0, 2]), np.array([2, 1])
    sizes = kernels._fringe_sizes_loop(d)
    small = statistic_from_proportions({0: 0.3, 1: 0.4, 2: 0.3}, min(n, 5000)).multiset()
    vals, counts = np.unique(small, return_counts=True)
    lf = kernels.log_factorials(small.size)
    m = small.size // 10
    return {
        "fringe_sizes": lambda k: k["fringe_sizes"](d),
        "rotation_start": lambda k: k["rotation_start"](bridge),
        "count_tree_windows": lambda k: k["count_tree_windows"](d, sizes, target),
        "count_statistic_windows": lambda k: k["count_statistic_windows"](d, sizes, degs, cnts, 3),
        "swor_dp": lambda k: k["swor_dp"](vals, counts, m, lf),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = {"numpy": kernels.NUMPY_KERNELS}
    if HAVE_NUMBA:
        backends["numba"] = kernels.NUMBA_KERNELS
    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in backends) + "   (best of repeats, ms)")
    for name, fn in cases(args.n, args.seed).items():
        row = []
        for k in backends.values():
            fn(k)  # warm-up, includes JIT compilation
            row.append(min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) * 1e3)
        print(f"{name:<26}" + "".join(f"{t:12.3f}" for t in row))


if __name__ == "__main__":
    main()
