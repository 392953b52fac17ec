"""Pure-Python fallback for the bound kernel.

Exports the same entry points as the compiled extension module. Selected by
``splitlabel.bound`` when the extension is unavailable or when the
``SPLITLABEL_PURE_KERNEL`` environment variable is set.
"""

from math import exp

BACKEND = "pure"


def bound_at(m, n, N, t):
    """Evaluate the lower bound on correct labels at buffer t.

    m: labels matching the majority class, n: labels drawn, N: node size.
    Returns n + (1 - exp(-2*n*t^2)) * (N - n) * (m/n - t), or 0.0 when n = 0.
    """
    if n == 0:
        return 0.0
    return n + (1.0 - exp(-2.0 * n * t * t)) * (N - n) * (m / n - t)


def max_bound(m, n, N, tol=1e-7, max_iters=200):
    """Maximize bound_at over t in [0, min(1, m/n)] by ternary search.

    The objective is unimodal on that interval, so discarding a third of the
    bracket per iteration converges to the maximizer. Stops when the bracket
    width drops below tol or after max_iters iterations. Returns
    (t_star, value); (0.0, 0.0) when n = 0.
    """
    if n == 0:
        return 0.0, 0.0
    lo = 0.0
    hi = m / n
    if hi > 1.0:
        hi = 1.0
    for _ in range(max_iters):
        if hi - lo <= tol:
            break
        third = (hi - lo) / 3.0
        t1 = lo + third
        t2 = hi - third
        if bound_at(m, n, N, t1) < bound_at(m, n, N, t2):
            lo = t1
        else:
            hi = t2
    t_star = 0.5 * (lo + hi)
    value = bound_at(m, n, N, t_star)
    if value < n:
        # t = 0 achieves exactly n, so never report less than that.
        return 0.0, float(n)
    return t_star, value
