import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from logsumm import sequences as sq, tauberian as tb
from logsumm.errors import DomainError, HorizonError

NS = [10**3, 10**4, 10**5]
LAMS = [2.0, 1.5, 1.2, 1.1, 1.05]
ELL_CONVERGENT = [sq.constant(1.0), sq.zero(), sq.alternating_01(), sq.alternating_sign(),
                  sq.slow_drift(1.0, 2.0), sq.log_oscillation(1.0, 1.0), sq.power(1.0, -0.5)]


def one_sided_oracle(vals, lam, n):
    best = math.inf
    for m in range(n, int(math.floor(lam * n)) + 1):
        best = min(best, math.fsum(vals[i] / (i + 1) for i in range(n, m + 1)))
    return best / math.log(n)


def moricz_quadrature(seq, a, b, panels=200):
    """int_a^b s(floor u) du/u by midpoint in log u, one block per unit interval."""
    edges = np.unique(np.concatenate([[a], np.arange(math.floor(a) + 1, math.ceil(b)), [b]]))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = math.log(hi / lo) / panels
        u = np.exp(math.log(lo) + (np.arange(panels) + 0.5) * h)
        total += h * float(np.sum(seq.values(np.floor(u).astype(np.int64))))
    return total


@given(arrays(float, 700, elements=st.floats(-5, 5)), st.sampled_from([1.1, 1.5, 2.0]),
       st.integers(2, 300))
def test_one_sided_matches_direct_oracle(vals, lam, n):
    prof = tb.one_sided_condition(sq.explicit(vals), [lam], [n])
    assert prof.values[0, 0] == pytest.approx(one_sided_oracle(vals.tolist(), lam, n), abs=1e-12)


def test_one_sided_verdicts():
    assert tb.one_sided_condition(sq.constant(1.0), LAMS, NS).verdict == "satisfied"
    prof = tb.one_sided_condition(sq.linear(-1.0, -1.0), LAMS, NS)
    assert prof.verdict == "violated" and prof.extrapolated < -100


@pytest.mark.parametrize("seq", ELL_CONVERGENT, ids=repr)
def test_one_sided_not_violated_on_slowly_oscillating(seq):
    assert tb.one_sided_condition(seq, LAMS, NS).verdict != "violated"


@given(arrays(float, 3000, elements=st.floats(-5, 5)), st.sampled_from([1.5, 2.0, 3.0]),
       st.floats(10.0, 2999.0))
def test_thm4_exact_sup_dominates_theta_grid(vals, alpha, x):
    s = sq.explicit(vals)
    got = tb.thm4_condition_ii(s, [alpha], [x]).values[0, 0]
    U = sq.weighted_prefix(s, 2999)
    theta = np.linspace(1.0, alpha, 4001)
    ks = np.floor(x ** (1.0 / theta)).astype(np.int64)
    brute = np.max(U[int(math.floor(x))] - U[ks]) / math.log(x)
    assert got >= brute - 1e-12
    # every integer in the range is hit by some theta; a fine grid finds it
    all_k = np.arange(int(math.floor(x ** (1 / alpha))), int(math.floor(x)) + 1)
    assert got == pytest.approx(np.max(U[int(math.floor(x))] - U[all_k]) / math.log(x), abs=1e-12)


@pytest.mark.parametrize("seq", ELL_CONVERGENT, ids=repr)
def test_thm4_satisfied_on_ell_convergent_families(seq):
    assert tb.thm4_condition_ii(seq, [3.0, 2.0, 1.5], [1e3, 1e4, 1e5, 1e6]).verdict == "satisfied"


def test_thm4_violated_on_linear_growth():
    assert tb.thm4_condition_ii(sq.linear(1.0, 1.0), [3.0, 2.0, 1.5], [1e3, 1e4, 1e5, 1e6]).verdict == "violated"


def test_thm6_direct_and_flags():
    rng = np.random.default_rng(2)
    vals = rng.normal(size=5000)
    s = sq.explicit(vals)
    prof = tb.thm6_gap_condition(s, 0.5, [0.05, 1.0], [100, 1000, 4000])
    # 0.05 sqrt(100) = 0.5 leaves only m = n in the window
    assert prof.flags[0].tolist() == [True, False, False]
    for j, n in enumerate([100, 1000, 4000]):
        end = int(math.ceil(n + math.sqrt(n)))
        assert prof.values[1, j] == pytest.approx((vals[n:end].min() - vals[n]) / n**0.5)


def test_thm6_verdicts():
    assert tb.thm6_gap_condition(sq.constant(1.0), 0.0, [0.5, 1.0], NS).verdict == "satisfied"
    assert tb.thm6_gap_condition(sq.alternating_sign(), 0.0, [0.5, 1.0], NS).verdict == "violated"


@pytest.mark.parametrize("lam, x", [(1.5, 37.3), (2.0, 40.0), (1.2, 400.7)])
def test_moricz_upper_against_quadrature(lam, x):
    rng = np.random.default_rng(int(x))
    s = sq.explicit(rng.normal(size=int(x**lam) + 2))
    ref = (moricz_quadrature(s, x, x**lam) - s.values(int(x)) * (lam - 1) * math.log(x)) / ((lam - 1) * math.log(x))
    assert tb.moricz_upper_value(s, lam, x) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("lam, x", [(0.5, 900.0), (0.8, 333.3), (0.95, 2000.5)])
def test_moricz_lower_against_quadrature(lam, x):
    rng = np.random.default_rng(int(x))
    s = sq.explicit(rng.normal(size=int(x) + 2))
    sx = s.values(int(x))
    ref = (sx * (1 - lam) * math.log(x) - moricz_quadrature(s, x**lam, x)) / ((1 - lam) * math.log(x))
    assert tb.moricz_lower_value(s, lam, x) == pytest.approx(ref, abs=1e-12)


def test_moricz_verdicts():
    up, lo = tb.moricz_conditions(sq.constant(2.0), [1.5, 1.1], [0.5, 0.9], [1e3, 1e4, 1e5])
    assert (up.verdict, lo.verdict) == ("satisfied", "satisfied")
    xs = [1e3, 1e3 + 1, 1e4, 1e4 + 1, 1e5, 1e5 + 1]  # both parities
    up, lo = tb.moricz_conditions(sq.alternating_01(), [1.5, 1.1], [0.5, 0.9], xs)
    assert (up.verdict, lo.verdict) == ("violated", "violated")


def test_errors():
    with pytest.raises(DomainError):
        tb.one_sided_condition(sq.constant(), [1.0], NS)
    with pytest.raises(DomainError):
        tb.thm4_condition_ii(sq.constant(), [0.5], [10.0])
    with pytest.raises(DomainError):
        tb.thm6_gap_condition(sq.constant(), -1.0, [1.0], NS)
    with pytest.raises(DomainError):
        tb.moricz_upper_value(sq.constant(), 0.9, 10.0)
    with pytest.raises(DomainError):
        tb.moricz_lower_value(sq.constant(), 1.5, 10.0)
    with pytest.raises(HorizonError):
        tb.one_sided_condition(sq.explicit(np.ones(100)), [2.0], [80])


def test_profile_rows():
    prof = tb.one_sided_condition(sq.constant(1.0), [1.5, 1.1], [100, 1000])
    assert len(prof.rows()) == 4 and set(prof.rows()[0]) == {"param", "horizon", "value"}
