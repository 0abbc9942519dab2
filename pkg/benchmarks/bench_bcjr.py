"""Compare the compiled and NumPy BCJR kernels on random likelihood tables.

    python benchmarks/bench_bcjr.py [--T 10000] [--memory 1 2 3 4 5 6] [--repeat 5]
"""
import argparse
import time

import numpy as np

from bcjrlab.bcjr import BACKENDS


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--T", type=int, default=10_000)
    parser.add_argument("--memory", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    names = sorted(BACKENDS)
    print(f"T = {args.T}, best of {args.repeat}; backends: {', '.join(names)}")
    print(f"{'memory':>6} {'states':>6} " + " ".join(f"{n + ' [ms]':>14}" for n in names) + f" {'speedup':>8}")
    for m in args.memory:
        values = rng.random((args.T, 2 ** m))
        t = {n: best_of(lambda: BACKENDS[n].run(values), args.repeat) for n in names}
        ref = [BACKENDS[n].run(values)[2] for n in names]
        assert all(np.allclose(ref[0], r, rtol=1e-10) for r in ref)
        speed = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{m:>6} {2 ** m:>6} " + " ".join(f"{1e3 * t[n]:>14.2f}" for n in names) + f" {speed:>7.1f}x")


if __name__ == "__main__":
    main()
