# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled bound kernel.

Scalar evaluation and ternary-search maximization of the lower bound on
correct labels. This is the hot path of the greedy engine (three
maximizations per leaf per step), hence the C implementation. The
pure-Python twin lives in ``splitlabel._boundpure``.
"""

from libc.math cimport exp

BACKEND = "compiled"


cdef inline double _eval(double m, double n, double N, double t) nogil:
    return n + (1.0 - exp(-2.0 * n * t * t)) * (N - n) * (m / n - t)


cpdef double bound_at(double m, double n, double N, double t):
    """Evaluate the lower bound on correct labels at buffer t.

    m: labels matching the majority class, n: labels drawn, N: node size.
    Returns n + (1 - exp(-2*n*t^2)) * (N - n) * (m/n - t), or 0.0 when n = 0.
    """
    if n == 0.0:
        return 0.0
    return _eval(m, n, N, t)


cpdef tuple max_bound(double m, double n, double N, double tol=1e-7,
                      int max_iters=200):
    """Maximize bound_at over t in [0, min(1, m/n)] by ternary search.

    The objective is unimodal on that interval, so discarding a third of the
    bracket per iteration converges to the maximizer. Stops when the bracket
    width drops below tol or after max_iters iterations. Returns
    (t_star, value); (0.0, 0.0) when n = 0.
    """
    cdef double lo, hi, third, t1, t2, t_star, value
    cdef int i
    if n == 0.0:
        return 0.0, 0.0
    lo = 0.0
    hi = m / n
    if hi > 1.0:
        hi = 1.0
    for i in range(max_iters):
        if hi - lo <= tol:
            break
        third = (hi - lo) / 3.0
        t1 = lo + third
        t2 = hi - third
        if _eval(m, n, N, t1) < _eval(m, n, N, t2):
            lo = t1
        else:
            hi = t2
    t_star = 0.5 * (lo + hi)
    value = _eval(m, n, N, t_star)
    if value < n:
        # t = 0 achieves exactly n, so never report less than that.
        return 0.0, n
    return t_star, value
