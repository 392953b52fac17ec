"""Time the compiled bound kernel against the pure-Python twin.

Runs max_bound over the same batch of random (m, n, N) statistics with both
implementations, checks they agree to 1e-9, and prints per-call timings.

Usage: python benchmarks/bench_bound_kernel.py [--stats 2000] [--repeats 5]
"""

import argparse
import time

import numpy as np

from splitlabel import _boundpure

try:
    from splitlabel import _boundcore
except ImportError:
    _boundcore = None


def sample_stats(num_stats, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(num_stats):
        n = int(rng.integers(1, 501))
        m = int(rng.integers(0, n + 1))
        N = int(rng.integers(n, 10001))
        out.append((m, n, N))
    return out


def time_kernel(max_bound, stats, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for m, n, N in stats:
            max_bound(m, n, N)
        best = min(best, time.perf_counter() - started)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--stats", type=int, default=2000,
                        help="number of random (m, n, N) triples")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats; the best one is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    stats = sample_stats(args.stats, args.seed)

    if _boundcore is None:
        print("compiled kernel not built; timing pure kernel only")
    else:
        worst = max(
            abs(_boundcore.max_bound(m, n, N)[1] - _boundpure.max_bound(m, n, N)[1])
            for m, n, N in stats
        )
        print(f"kernel agreement over {args.stats} stats: worst |diff| = {worst:.3g}")
        if worst > 1e-9:
            raise SystemExit("kernels disagree beyond 1e-9, refusing to time")

    pure = time_kernel(_boundpure.max_bound, stats, args.repeats)
    print(f"pure      {pure * 1e6 / args.stats:9.2f} us/call "
          f"({args.stats / pure:,.0f} calls/s)")
    if _boundcore is not None:
        compiled = time_kernel(_boundcore.max_bound, stats, args.repeats)
        print(f"compiled  {compiled * 1e6 / args.stats:9.2f} us/call "
              f"({args.stats / compiled:,.0f} calls/s)")
        print(f"speedup   {pure / compiled:9.1f}x")


if __name__ == "__main__":
    main()
