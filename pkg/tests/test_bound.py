"""Bound evaluation and maximization: frozen-oracle examples and properties.

The DERIVED expectations were computed by the independent grid/parabolic
oracle in reference.py before the package existed, then frozen here.
"""

import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference
from splitlabel import validation
from splitlabel.bound import (
    NodeStats,
    NoConsumableError,
    StatsError,
    bound_value,
    kernel_backend,
    maximize_bound,
    score_label,
    score_split,
)


@st.composite
def valid_stats(draw, n_min=0, n_max=500, N_max=10000):
    n = draw(st.integers(n_min, n_max))
    m = draw(st.integers(0, n))
    N = draw(st.integers(n, N_max))
    return NodeStats(m=m, n=n, N=N)


# ---------------------------------------------------------------- examples

def test_bound_value_at_t0_equals_n():
    assert bound_value(NodeStats(7, 10, 100), 0.0) == 10.0


def test_bound_value_fully_labeled_node():
    assert bound_value(NodeStats(40, 50, 50), 0.3) == 50.0


def test_bound_value_frozen_case():
    got = bound_value(NodeStats(9, 10, 100), 0.2)
    assert got == pytest.approx(44.692275260615034, abs=1e-9)
    assert got == pytest.approx(reference.bound_formula(9, 10, 100, 0.2), abs=1e-12)


def test_bound_value_rejects_t_outside_unit_interval():
    with pytest.raises(StatsError):
        bound_value(NodeStats(1, 2, 10), -0.1)
    with pytest.raises(StatsError):
        bound_value(NodeStats(1, 2, 10), 1.5)


def test_stats_invariants_rejected():
    with pytest.raises(StatsError):
        NodeStats(3, 2, 10)
    with pytest.raises(StatsError):
        NodeStats(0, 5, 4)
    with pytest.raises(StatsError):
        NodeStats(-1, 0, 10)


def test_maximize_empty_sample_convention():
    ev = maximize_bound(NodeStats(0, 0, 500))
    assert (ev.t_star, ev.value) == (0.0, 0.0)


def test_maximize_fully_labeled_node():
    assert maximize_bound(NodeStats(40, 50, 50)).value == 50.0


def test_maximize_frozen_case():
    ev = maximize_bound(NodeStats(9, 10, 100))
    assert ev.value == pytest.approx(55.493920748161884, abs=1e-9)
    assert ev.t_star == pytest.approx(0.32707371400408086, abs=1e-6)
    _, oracle_value = reference.grid_max_refined(9, 10, 100)
    assert ev.value == pytest.approx(oracle_value, abs=1e-6)


def test_score_label_on_empty_node():
    got = score_label(NodeStats(0, 0, 200))
    assert got == maximize_bound(NodeStats(1, 1, 200)).value
    assert got == pytest.approx(41.9330775681661, abs=1e-9)


def test_score_label_frozen_case():
    assert score_label(NodeStats(9, 10, 100)) == pytest.approx(
        57.92044750410935, abs=1e-9
    )


def test_score_label_nearly_full_node_saturates():
    assert score_label(NodeStats(48, 49, 50)) == 50.0


def test_score_label_requires_unsampled_example():
    with pytest.raises(NoConsumableError):
        score_label(NodeStats(40, 50, 50))


def test_score_split_empty_children():
    assert score_split([NodeStats(0, 0, 60), NodeStats(0, 0, 40)]) == 0.0


def test_score_split_symmetry():
    one = maximize_bound(NodeStats(5, 5, 50)).value
    assert score_split([NodeStats(5, 5, 50), NodeStats(5, 5, 50)]) == pytest.approx(
        2 * one, abs=1e-12
    )


def test_score_split_frozen_case():
    got = score_split([NodeStats(9, 10, 60), NodeStats(3, 8, 40)])
    assert got == pytest.approx(45.95061516049043, abs=1e-9)


def test_score_split_rejects_no_children():
    with pytest.raises(StatsError):
        score_split([])


# -------------------------------------------------------------- properties

@given(valid_stats(n_min=1))
@settings(max_examples=300, deadline=None)
def test_t0_exactness(stats):
    assert bound_value(stats, 0.0) == float(stats.n)


@given(valid_stats(n_min=1), st.floats(0.0, 1.0))
@settings(max_examples=300, deadline=None)
def test_upper_bound_on_search_interval(stats, frac):
    t = frac * min(1.0, stats.m / stats.n)
    assert bound_value(stats, t) <= stats.N + 1e-9


@given(valid_stats())
@settings(max_examples=300, deadline=None)
def test_maximizer_dominates_n_and_respects_N(stats):
    ev = maximize_bound(stats)
    assert ev.value >= stats.n
    assert ev.value <= stats.N + 1e-9
    if stats.n > 0:
        assert 0.0 <= ev.t_star <= min(1.0, stats.m / stats.n) + 1e-7


@given(st.integers(1, 500), st.data())
@settings(max_examples=200, deadline=None)
def test_monotone_in_m(n, data):
    N = data.draw(st.integers(n, 10000))
    m2 = data.draw(st.integers(1, n))
    m1 = data.draw(st.integers(0, m2 - 1))
    lo = maximize_bound(NodeStats(m1, n, N)).value
    hi = maximize_bound(NodeStats(m2, n, N)).value
    assert hi >= lo - 1e-9


def test_ternary_matches_grid_oracle():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        m, n, N = reference.random_stats(rng)
        val = maximize_bound(NodeStats(m, n, N)).value
        _, refined = reference.grid_max_refined(m, n, N)
        _, raw = reference.grid_max(m, n, N)
        assert abs(val - refined) <= 1e-6, (m, n, N)
        assert val >= raw - 1e-9, (m, n, N)


def test_unimodality_witness():
    # Finite differences along the t grid must show one ascending stretch
    # followed by one descending stretch, never a second ascent.
    rng = np.random.default_rng(99)
    step = 1e-4
    for _ in range(1000):
        m, n, N = reference.random_stats(rng)
        hi = min(1.0, m / n)
        ts = np.arange(0.0, hi + step, step)
        ts = ts[ts <= hi]
        if len(ts) < 3:
            continue
        vals = n + (1.0 - np.exp(-2.0 * n * ts * ts)) * (N - n) * (m / n - ts)
        d = np.diff(vals)
        ascent = np.nonzero(d > 1e-9)[0]
        descent = np.nonzero(d < -1e-9)[0]
        if len(ascent) and len(descent):
            assert ascent.max() < descent.min(), (m, n, N)


# ------------------------------------------------------------ monte carlo

def test_mc_cell_agrees_with_reference_semantics():
    # Same seed, same draw order: the package harness and an independent
    # recomputation of the realized-correct count must agree trial by trial.
    p, n, N, trials, seed = 0.7, 50, 1000, 300, 5
    cell = validation.mc_cell(p, n, N=N, trials=trials, seed=seed)

    rng = np.random.default_rng(seed)
    n_major = int(round(p * N))
    pop = np.concatenate([np.zeros(n_major, np.int64),
                          np.ones(N - n_major, np.int64)])
    violations = 0
    for _ in range(trials):
        idx = rng.choice(N, size=n, replace=False)
        c0 = int(np.sum(pop[idx] == 0))
        m = max(c0, n - c0) if c0 != n - c0 else c0
        value = maximize_bound(NodeStats(m, n, N)).value
        if value > reference.realized_correct(pop, idx) + 1e-9:
            violations += 1
    assert cell.violations == violations
    assert cell.rate <= 0.05


def test_mc_fully_sampled_cell_has_zero_violations():
    cell = validation.mc_cell(0.8, 1000, N=1000, trials=200, seed=3)
    assert cell.violations == 0


# ----------------------------------------------------------------- kernels

def test_kernel_backends_agree():
    from splitlabel import _boundpure

    rng = np.random.default_rng(7)
    for _ in range(200):
        m, n, N = reference.random_stats(rng)
        ev = maximize_bound(NodeStats(m, n, N))
        t_p, v_p = _boundpure.max_bound(m, n, N, 1e-7, 200)
        assert ev.value == pytest.approx(v_p, abs=1e-9)
        assert ev.t_star == pytest.approx(t_p, abs=1e-9)


def test_pure_kernel_env_override():
    out = subprocess.run(
        [sys.executable, "-c",
         "from splitlabel.bound import kernel_backend; print(kernel_backend())"],
        capture_output=True, text=True,
        env={"PATH": "/usr/bin:/bin", "SPLITLABEL_PURE_KERNEL": "1"},
    )
    assert out.stdout.strip() == "pure"
    assert kernel_backend() in ("compiled", "pure")
