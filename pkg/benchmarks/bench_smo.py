"""Benchmark the compiled SMO core against the pure-Python fallback.

The two backends run the same working-set algorithm; the compiled one
exists because experiment harnesses solve tens of thousands of small
duals. Run from the repository root:

    python benchmarks/bench_smo.py [--sizes 50,100,200,400] [--repeats 5]

Timings use the best of `--repeats` runs per size. The script also
cross-checks that both backends return identical solutions on every
benchmarked problem, so speed never silently buys a different answer.
"""

import argparse
import sys
import time

import numpy as np

from kerndiv import smo
from kerndiv.kernel import KernelSpec, SampleSet, gram_matrix
from kerndiv.seeding import substream


def make_problem(n, rng):
    half = n // 2
    data = np.vstack([
        rng.normal(0.0, 1.0, size=(half, 5)),
        rng.normal(0.7, 1.2, size=(n - half, 5)),
    ])
    y = np.concatenate([np.ones(half), -np.ones(n - half)])
    gram = gram_matrix(KernelSpec(family="gaussian", bandwidth=2.0), SampleSet(data=data))
    return gram.values, y


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="50,100,200,400",
                        help="comma-separated problem sizes")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--cost", type=float, default=1.0)
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    if not smo.HAVE_COMPILED:
        print("compiled backend unavailable (pure-Python build); "
              "timing the fallback against itself is pointless", file=sys.stderr)
        return 1

    rng = substream(777, 0)
    print(f"{'n':>6} {'compiled':>12} {'python':>12} {'speedup':>9}   identical")
    for n in sizes:
        K, y = make_problem(n, rng)
        max_iter = smo.default_max_iter(n)
        run_c = lambda: smo._compiled_solve(K, y, args.cost, smo.DEFAULT_TOL, max_iter)
        run_p = lambda: smo._py_solve(K, y, args.cost, smo.DEFAULT_TOL, max_iter)
        alpha_c, _, iters_c, gap_c = run_c()
        alpha_p, _, iters_p, gap_p = run_p()
        same = (np.array_equal(alpha_c, alpha_p)
                and iters_c == iters_p and gap_c == gap_p)
        t_c = best_time(run_c, args.repeats)
        t_p = best_time(run_p, args.repeats)
        print(f"{n:>6} {t_c * 1e3:>10.3f}ms {t_p * 1e3:>10.3f}ms {t_p / t_c:>8.1f}x   {same}")
        if not same:
            print("backend mismatch; investigate before trusting timings", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
