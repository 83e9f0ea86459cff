"""Time every kernel on its numba and numpy implementations.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from mklab import _accel
from mklab.nc_lattice import nc_firsts, NonCrossingPartition
from mklab.perm_group import all_permutations


def workloads():
    rng = np.random.default_rng(0)
    perms = np.ascontiguousarray(all_permutations(8))
    firsts = nc_firsts(11)
    top = NonCrossingPartition.parse("{1,2,3|4,5,6,7|8,9|10,11}").firsts()
    x = rng.normal(size=400)
    g = rng.normal(size=(200, 200)) + 1j * rng.normal(size=(200, 200))
    h = np.ascontiguousarray((g + g.conj().T) / 2)
    d, e = _accel.NUMPY_KERNELS["tridiagonalize"](h)
    return {
        "cycle_counts": (perms,),
        "cycle_length_counts": (perms,),
        "refines_mask": (firsts, top),
        "power_sums": (x, 8),
        "tridiagonalize": (h,),
        "tridiag_eigvals": (d, e, 60),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':<22}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, call_args in workloads().items():
        times = {}
        for label, table in (("numba", _accel.NUMBA_KERNELS), ("numpy", _accel.NUMPY_KERNELS)):
            fn = table[name]
            fn(*call_args)  # compile / warm up
            times[label] = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{times['numba']:>12.3f}{times['numpy']:>12.3f}{times['numpy'] / times['numba']:>10.2f}x")


if __name__ == "__main__":
    main()
