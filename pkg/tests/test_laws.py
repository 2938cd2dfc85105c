import functools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from logsumm import laws
from logsumm.errors import DomainError
from logsumm.special_functions import phi

POWER = {"zipf_plain": 0, "zipf_log1": 1, "zipf_log2": 2}


@functools.lru_cache(None)
def mp_normaliser(p):
    # the default nsum extrapolation is unreliable for log-damped series
    return float(mpmath.nsum(lambda n: 1 / (n**2 * mpmath.log(n) ** p), [2, mpmath.inf],
                             method="euler-maclaurin"))


def brute_pmf(p, n):
    n = np.asarray(n, dtype=float)
    return 1.0 / (n**2 * np.log(n) ** p) / mp_normaliser(p)


def test_plain_normaliser_closed_form():
    t = laws._table(0)
    assert t.Z == pytest.approx(math.pi**2 / 6 - 1, rel=1e-14)


@pytest.mark.parametrize("p", [1, 2])
def test_log_normalisers_against_mpmath(p):
    assert laws._table(p).Z == pytest.approx(mp_normaliser(p), rel=1e-12)


@pytest.mark.parametrize("kind", list(POWER))
def test_truncated_mean_small_k_direct_sum(kind):
    p = POWER[kind]
    law = laws.zipf(kind)
    for k in (1, 10, 300):
        cut = math.floor(phi(k + 1.0))
        n = np.arange(2, cut + 1, dtype=float)
        ref = math.fsum((n * brute_pmf(p, n)).tolist())
        assert law.truncated_mean(k) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("kind", ["zipf_log1", "zipf_log2"])
def test_truncated_mean_beyond_dense_table(kind):
    p = POWER[kind]
    law = laws.zipf(kind)
    k = 400_000  # cut-off ~5.6e6, past the dense table
    cut = math.floor(phi(k + 1.0))
    parts = []
    for a in range(2, cut + 1, 1 << 20):
        n = np.arange(a, min(a + (1 << 20), cut + 1), dtype=float)
        parts.append(math.fsum((n * brute_pmf(p, n)).tolist()))
    assert law.truncated_mean(k) == pytest.approx(math.fsum(parts), rel=1e-10)


@pytest.mark.parametrize("kind", list(POWER))
def test_tail_matches_brute_force(kind):
    p = POWER[kind]
    t = laws._table(p)
    for k in (2, 3, 50, 10**4, 3 * 10**6):
        n = np.arange(2, k, dtype=float)
        ref = 1.0 - math.fsum(brute_pmf(p, n).tolist()) if k > 2 else 1.0
        assert float(t.tail_from(np.array([k]))[0]) == pytest.approx(ref, rel=1e-9, abs=1e-15)


def test_tail_abs_finite_laws():
    law = laws.two_point(-3.0, 2.0, 0.25)
    assert law.tail_abs(2.5) == pytest.approx(0.25)
    assert law.tail_abs(1.0) == pytest.approx(1.0)
    assert law.tail_abs(3.0) == 0.0


def test_truncated_mean_monotone_and_limit():
    law = laws.poisson_like(3.0)
    m = law.truncated_mean(np.arange(0, 80))
    assert np.all(np.diff(m) >= 0)
    assert m[-1] == pytest.approx(3.0, rel=1e-14)
    z = laws.zipf("zipf_log2")
    mz = z.truncated_mean(np.logspace(1, 6, 11).astype(np.int64))
    assert np.all(np.diff(mz) > 0) and mz[-1] < z.mean()
    # once phi(k+1) passes the cap, m_k is the capped mean
    assert z.truncated_mean(10**8) == pytest.approx(z.mean(), rel=1e-15)


def test_signed_laws_centre_at_zero():
    law = laws.zipf("zipf_log1", signed=True)
    assert law.truncated_mean(100) == 0.0 and law.mean() == 0.0
    x = law.sample(np.random.default_rng(0), 10**5)
    assert abs(np.mean(x > 0) - 0.5) < 0.01


def test_moment_flags():
    assert (laws.zipf("zipf_log2").has_mean, laws.zipf("zipf_log2").has_LlogL) == (True, True)
    assert (laws.zipf("zipf_log1").has_mean, laws.zipf("zipf_log1").has_LlogL) == (False, True)
    assert (laws.zipf("zipf_plain").has_mean, laws.zipf("zipf_plain").has_LlogL) == (False, False)


def test_capped_mean_of_log1_is_finite_and_grows_with_cap():
    small = laws.zipf("zipf_log1", cap=10**4).mean()
    big = laws.zipf("zipf_log1", cap=10**8).mean()
    assert 0 < small < big < math.inf


@pytest.mark.parametrize("kind", list(POWER))
def test_sampler_frequencies(kind):
    p = POWER[kind]
    law = laws.zipf(kind)
    x = law.sample(np.random.default_rng(1), 400_000)
    for n in (2, 3, 7):
        pr = float(brute_pmf(p, n))
        sd = math.sqrt(pr * (1 - pr) / x.size)
        assert abs(np.mean(x == n) - pr) <= 5 * sd


def test_sampler_far_tail():
    law = laws.zipf("zipf_plain")
    x = law.sample(np.random.default_rng(2), 10**6)
    pr = float(law.tail_abs(10**4 - 1))
    sd = math.sqrt(pr / x.size)
    assert abs(np.mean(x >= 10**4) - pr) <= 5 * sd


def test_cap_receives_the_tail_mass():
    law = laws.zipf("zipf_plain", cap=1000)
    x = law.sample(np.random.default_rng(3), 200_000)
    assert x.max() == 1000
    pr = law.cap_bias()
    assert abs(np.mean(x == 1000) - pr) <= 5 * math.sqrt(pr / x.size)
    # the capped mean is the mean of what is sampled
    assert np.mean(x) == pytest.approx(law.mean(), rel=0.05)


def test_abs_expectation_finite_and_zipf():
    law = laws.two_point(-2.0, 1.0, 0.5)
    assert law.abs_expectation(lambda v: v, 5) == pytest.approx(1.5)
    assert law.abs_expectation(lambda v: v, 1) == pytest.approx(0.5)
    z = laws.zipf("zipf_log2")
    n = np.arange(2, 1001, dtype=float)
    ref = math.fsum((n * brute_pmf(2, n)).tolist())
    assert z.abs_expectation(lambda v: v, 1000) == pytest.approx(ref, rel=1e-12)


def test_pmf_nonneg():
    assert laws.poisson_like(2.0).pmf_nonneg(1e-20).sum() == pytest.approx(1.0, abs=1e-15)
    assert laws.two_point(0.0, 2.0, 0.5).pmf_nonneg(1e-12).tolist() == [0.5, 0.0, 0.5]
    with pytest.raises(DomainError):
        laws.two_point(-1.0, 1.0).pmf_nonneg(1e-12)
    with pytest.raises(DomainError):
        laws.zipf("zipf_plain").pmf_nonneg(1e-12)


@pytest.mark.parametrize("text, name", [
    ("zero", "point_mass:0.0"), ("pm1", "two_point:-1.0,1.0,0.5"), ("const:2", "point_mass:2.0"),
    ("two_point:0,1,0.3", "two_point:0.0,1.0,0.3"), ("poisson:2", "poisson_like:2.0"),
    ("zipf_log1:signed", "zipf_log1:signed"), ("zipf_plain", "zipf_plain"),
])
def test_parse_law(text, name):
    assert laws.parse_law(text).name == name


def test_parse_law_errors():
    with pytest.raises(KeyError):
        laws.parse_law("cauchy")
    with pytest.raises(DomainError):
        laws.two_point(0, 1, 1.5)
    with pytest.raises(DomainError):
        laws.poisson_like(0.0)


@given(st.integers(0, 10**7))
def test_truncated_mean_bounded_by_mean(k):
    law = laws.zipf("zipf_log2")
    assert 0 <= law.truncated_mean(k) <= law.mean() + 1e-12
