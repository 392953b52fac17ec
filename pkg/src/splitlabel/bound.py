"""Lower-bound scoring of node label statistics.

A node holds N examples, n of which have sampled labels, m of those agreeing
with the node's majority class. The bound counts the n sampled labels as
correct and credits the remaining N - n examples only after shrinking the
observed majority fraction m/n by a concentration buffer t; the factor
(1 - exp(-2*n*t^2)) is the confidence that the true majority fraction is not
more than t below m/n. Maximizing over t yields the tightest such pessimistic
estimate, and the greedy engine compares these maxima across actions.

The maximization kernel is compiled (``splitlabel._boundcore``); a pure-Python
twin is selected automatically when the extension is missing, or explicitly by
setting the ``SPLITLABEL_PURE_KERNEL`` environment variable to a nonempty
value other than "0".
"""

import os
from dataclasses import dataclass

if os.environ.get("SPLITLABEL_PURE_KERNEL", "0") not in ("", "0"):
    from splitlabel import _boundpure as _kernel
else:
    try:
        from splitlabel import _boundcore as _kernel  # type: ignore[no-redef]
    except ImportError:
        from splitlabel import _boundpure as _kernel  # type: ignore[no-redef]

# Ternary search stops when the t bracket is narrower than this, or after
# MAX_ITERS halvings, whichever comes first.
BRACKET_TOL = 1e-7
MAX_ITERS = 200


class StatsError(ValueError):
    """Node statistics violate their invariants."""


class NoConsumableError(StatsError):
    """A label action was scored for a node with no example left to sample."""


@dataclass(frozen=True)
class NodeStats:
    """Label counts of one node: majority matches m, labels n, size N."""

    m: int
    n: int
    N: int

    def __post_init__(self):
        if not (0 <= self.m <= self.n <= self.N):
            raise StatsError(
                f"need 0 <= m <= n <= N, got m={self.m} n={self.n} N={self.N}"
            )


@dataclass(frozen=True)
class BoundEval:
    """Result of maximizing the bound: the best buffer and its value."""

    t_star: float
    value: float


def kernel_backend():
    """Name of the active kernel implementation: "compiled" or "pure"."""
    return _kernel.BACKEND


def bound_value(stats, t):
    """Evaluate the bound at one buffer value t in [0, 1].

    Returns n + (1 - exp(-2*n*t^2)) * (N - n) * (m/n - t). At t = 0 this is
    exactly n. When n = 0 the majority fraction is undefined and the node
    contributes nothing, so the value is 0.
    """
    if not 0.0 <= t <= 1.0:
        raise StatsError(f"buffer t must be in [0, 1], got {t}")
    return _kernel.bound_at(stats.m, stats.n, stats.N, t)


def maximize_bound(stats, tolerance=BRACKET_TOL):
    """Maximize the bound over t in [0, min(1, m/n)].

    Beyond m/n the unlabeled term goes negative, so the search is confined to
    the unimodal stretch where ternary search applies. The returned value is
    never below n (t = 0 attains n exactly) and never above N.
    """
    t_star, value = _kernel.max_bound(
        stats.m, stats.n, stats.N, tolerance, MAX_ITERS
    )
    return BoundEval(t_star=t_star, value=value)


def score_label(stats):
    """Anticipated bound if one more sampled label confirms the majority.

    Evaluates the maximized bound at (m+1, n+1, N). Requires n < N; a fully
    sampled node has nothing left to draw.
    """
    if stats.n >= stats.N:
        raise NoConsumableError(
            f"no unsampled example remains (n = N = {stats.N})"
        )
    return maximize_bound(NodeStats(m=stats.m + 1, n=stats.n + 1, N=stats.N)).value


def score_split(children):
    """Anticipated total bound of a candidate split: sum of child maxima."""
    if not children:
        raise StatsError("a split proposal needs at least one child")
    return sum(maximize_bound(child).value for child in children)
