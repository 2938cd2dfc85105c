import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from logsumm.asclt_lab import DEFAULT_GRID, asclt_curve, draw_steps
from logsumm.errors import DomainError


def direct_curve(law, n, xs, seed):
    """O(n * grid) reference: every indicator evaluated explicitly."""
    rng = np.random.default_rng(seed)
    z = np.cumsum(draw_steps(law, n, rng)) / np.sqrt(np.arange(1, n + 1))
    w = 1.0 / np.arange(1, n + 1)
    return np.array([math.fsum(w[z <= x].tolist()) for x in xs]) / math.log(n)


@pytest.mark.parametrize("law", ["rademacher", "uniform_pm", "two_point_std:0.3"])
def test_one_pass_matches_direct(law):
    xs = np.linspace(-2.5, 2.5, 26)
    c = asclt_curve(law, 5000, xs, seed=4)
    assert np.allclose(c.empirical, direct_curve(law, 5000, xs, 4), atol=1e-12)


def test_grid_points_equal_to_statistic_are_included():
    # rademacher S_1/sqrt(1) is exactly +-1, so x = 1 must count k = 1
    c = asclt_curve("rademacher", 10, [-1.0, 1.0], seed=0)
    ref = direct_curve("rademacher", 10, [-1.0, 1.0], 0)
    assert np.array_equal(c.empirical, ref) or np.allclose(c.empirical, ref, atol=1e-15)


@given(st.integers(10, 3000), st.integers(0, 10**6))
def test_monotone_and_bounded(n, seed):
    c = asclt_curve("uniform_pm", n, seed=seed)
    assert np.all(np.diff(c.empirical) >= 0)
    assert c.empirical[0] >= 0
    h = math.fsum(1.0 / k for k in range(1, n + 1)) / math.log(n)
    assert c.empirical[-1] <= h + 1e-12


def test_far_tails():
    c = asclt_curve("rademacher", 10**4, [-10.0, 10.0], seed=2)
    h = math.fsum(1.0 / k for k in range(1, 10**4 + 1)) / math.log(10**4)
    assert c.empirical[0] == 0.0
    assert c.empirical[1] == pytest.approx(h, abs=1e-12)
    assert abs(h - 1) <= 0.7 / math.log(10**4)
    for seed in range(10):
        assert asclt_curve("rademacher", 10**4, [-10.0], seed=seed).empirical[0] == 0.0


def test_harmonic_mass_bound_at_1e5():
    n = 10**5
    h = math.fsum(1.0 / k for k in range(1, n + 1)) / math.log(n)
    assert abs(h - 1.0) <= 0.7 / math.log(n)


def test_steps_are_standardised():
    rng = np.random.default_rng(0)
    for law in ("rademacher", "uniform_pm", "two_point_std:0.2"):
        x = draw_steps(law, 400_000, rng)
        assert abs(x.mean()) < 0.01 and abs(x.var() - 1) < 0.01


def test_sup_gap_and_csv():
    c = asclt_curve("rademacher", 1000, seed=1)
    assert c.sup_gap == pytest.approx(np.max(np.abs(c.empirical - c.reference)))
    lines = c.to_csv().splitlines()
    assert lines[0] == "x,empirical,reference" and len(lines) == DEFAULT_GRID.size + 1


def test_deterministic_in_seed():
    a = asclt_curve("uniform_pm", 2000, seed=9)
    b = asclt_curve("uniform_pm", 2000, seed=9)
    assert np.array_equal(a.empirical, b.empirical)


def test_median_gap_shrinks():
    g3 = np.median([asclt_curve("rademacher", 10**3, seed=s).sup_gap for s in range(20)])
    g5 = np.median([asclt_curve("rademacher", 10**5, seed=s).sup_gap for s in range(20)])
    assert g5 < g3


def test_errors():
    with pytest.raises(DomainError):
        asclt_curve("rademacher", 5)
    with pytest.raises(DomainError):
        asclt_curve("rademacher", 100, [1.0, 0.0])
    with pytest.raises(DomainError):
        asclt_curve("two_point_std:1.5", 100)
    with pytest.raises(KeyError):
        asclt_curve("cauchy", 100)
