"""Compiled vs numpy-fallback timing for the two counting kernels.

    python benchmarks/bench_kernels.py [--T 1000] [--p 500] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fqatest import _fallback

try:
    from fqatest import _kernels as compiled
except ImportError:
    compiled = None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=1000)
    ap.add_argument("--p", type=int, default=500)
    ap.add_argument("--P", type=int, default=19)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    values = rng.standard_normal((args.T, args.p))
    qcurves = np.sort(rng.standard_normal((args.P, args.p)), axis=0)
    ind = (rng.random((args.T, args.P)) < 0.5).astype(np.uint8)

    cases = {
        "excursion_counts": lambda mod: mod.excursion_counts(values, qcurves),
        "lagged_joint_counts": lambda mod: mod.lagged_joint_counts(ind, 1),
    }
    backends = [("python", _fallback)] + ([("cython", compiled)] if compiled else [])
    print(f"T={args.T} p={args.p} P={args.P}, best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for label, fn in cases.items():
        ref = fn(_fallback)
        times = []
        for _, mod in backends:
            assert np.array_equal(fn(mod), ref), f"{label}: backends disagree"
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{label:<22}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + speed)
    if compiled is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
