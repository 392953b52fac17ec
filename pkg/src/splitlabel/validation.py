"""Randomized validity checks for the bound.

Two suites, both runnable from the command line through ``cmd_boundcheck``:

- Monte-Carlo sampling experiments on synthetic two-class populations with a
  known majority fraction, counting how often the maximized bound exceeds the
  realized number of correct labels.
- Agreement of the ternary-search maximizer with a dense grid search over the
  buffer t.
"""

from dataclasses import dataclass

import numpy as np

from splitlabel.bound import NodeStats, maximize_bound

MC_MAJORITY_FRACTIONS = (0.6, 0.7, 0.8, 0.9, 0.95)
MC_SAMPLE_SIZES = (20, 50, 100, 200)


@dataclass(frozen=True)
class McCell:
    """Violation statistics for one (majority fraction, sample size) cell."""

    p: float
    n: int
    N: int
    trials: int
    violations: int

    @property
    def rate(self):
        return self.violations / self.trials


def mc_cell(p, n, N=1000, trials=2000, seed=0):
    """Run one Monte-Carlo cell and return its violation statistics.

    Builds a population of size N with round(p*N) examples of class 0 and the
    rest of class 1, draws n labels uniformly without replacement, and
    maximizes the bound from the sample statistics. A trial is a violation
    when the bound exceeds the realized number of correct labels: the n
    sampled examples (their labels are known, hence correct) plus every
    unsampled example whose true class equals the sample majority (ties going
    to the lowest class).
    """
    rng = np.random.default_rng(seed)
    n_major = int(round(p * N))
    violations = 0
    for _ in range(trials):
        idx = rng.choice(N, size=n, replace=False)
        c0 = int(np.sum(idx < n_major))
        c1 = n - c0
        if c0 >= c1:
            m, realized = c0, n + (n_major - c0)
        else:
            m, realized = c1, n + (N - n_major - c1)
        value = maximize_bound(NodeStats(m=m, n=n, N=N)).value
        if value > realized + 1e-9:
            violations += 1
    return McCell(p=p, n=n, N=N, trials=trials, violations=violations)


def mc_table(fractions=MC_MAJORITY_FRACTIONS, sample_sizes=MC_SAMPLE_SIZES,
             N=1000, trials=2000, seed=0):
    """Monte-Carlo violation rates over the full (p, n) grid."""
    cells = []
    for i, p in enumerate(fractions):
        for j, n in enumerate(sample_sizes):
            cells.append(mc_cell(p, n, N=N, trials=trials,
                                 seed=seed + 1000 * i + j))
    return cells


def _grid_values(m, n, N, step):
    hi = min(1.0, m / n)
    ts = np.arange(0.0, hi + step, step)
    ts = ts[ts <= hi]
    if ts[-1] != hi:
        ts = np.append(ts, hi)
    vals = n + (1.0 - np.exp(-2.0 * n * ts * ts)) * (N - n) * (m / n - ts)
    return ts, vals


def grid_max(m, n, N, step=1e-5, refine=True):
    """Dense-grid maximization of the bound over t, independent of ternary.

    With refine=True a parabola is fitted through the best grid triple, which
    removes the grid's O(step^2) discretization error; refine=False returns
    the raw argmax.
    """
    if n == 0:
        return 0.0, 0.0
    ts, vals = _grid_values(m, n, N, step)
    i = int(np.argmax(vals))
    if not refine or i == 0 or i == len(ts) - 1:
        return float(ts[i]), float(vals[i])
    a, b, c = ts[i - 1], ts[i], ts[i + 1]
    fa, fb, fc = vals[i - 1], vals[i], vals[i + 1]
    denom = (b - a) * (fb - fc) - (b - c) * (fb - fa)
    if denom == 0:
        return float(b), float(fb)
    t = b - 0.5 * ((b - a) ** 2 * (fb - fc) - (b - c) ** 2 * (fb - fa)) / denom
    t = min(max(t, a), c)
    v = n + (1.0 - np.exp(-2.0 * n * t * t)) * (N - n) * (m / n - t)
    return (float(t), float(v)) if v >= fb else (float(b), float(fb))


@dataclass(frozen=True)
class GridAgreement:
    """Summary of ternary-vs-grid comparison over randomized statistics."""

    num_stats: int
    failures: int
    worst_abs_diff: float
    worst_below_raw_grid: float


def grid_agreement(num_stats=1000, seed=1234, step=1e-5, tol=1e-6):
    """Compare the ternary maximizer against the grid oracle.

    A failure is a case where |ternary value - refined grid value| > tol.
    Also tracks the worst amount by which ternary falls below the RAW grid
    maximum (a one-sided sanity margin: ternary should never lose to a grid
    point it could have matched).
    """
    rng = np.random.default_rng(seed)
    failures = 0
    worst = 0.0
    worst_below = 0.0
    for _ in range(num_stats):
        n = int(rng.integers(1, 501))
        m = int(rng.integers(0, n + 1))
        N = int(rng.integers(n, 10001))
        val = maximize_bound(NodeStats(m=m, n=n, N=N)).value
        _, refined = grid_max(m, n, N, step=step, refine=True)
        _, raw = grid_max(m, n, N, step=step, refine=False)
        diff = abs(val - refined)
        if diff > tol:
            failures += 1
        worst = max(worst, diff)
        worst_below = max(worst_below, raw - val)
    return GridAgreement(num_stats=num_stats, failures=failures,
                         worst_abs_diff=worst, worst_below_raw_grid=worst_below)
