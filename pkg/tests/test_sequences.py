import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from logsumm import sequences as sq
from logsumm.errors import CapacityError, DomainError, HorizonError

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def exact_weighted(values, lo, hi):
    # fsum rounds once over the float quotients, so the oracle sums those exactly
    return float(sum((Fraction(v / (i + 1)) for i, v in enumerate(values) if lo < i <= hi), Fraction(0)))


@pytest.mark.parametrize("seq, head", [
    (sq.constant(2.0), [2, 2, 2, 2]),
    (sq.zero(), [0, 0, 0, 0]),
    (sq.alternating_01(), [1, 0, 1, 0]),
    (sq.alternating_sign(), [1, -1, 1, -1]),
    (sq.linear(1.0, 2.0), [1, 3, 5, 7]),
    (sq.power(1.0, 2.0), [1, 4, 9, 16]),
    (sq.power(1.0, 1.0, True), [1, -2, 3, -4]),
])
def test_family_heads(seq, head):
    assert seq.segment(0, 4).tolist() == head


def test_declared_limits():
    assert sq.alternating_01().limit == 0.5
    assert sq.slow_drift(3.0, 1.0).limit == 3.0
    assert sq.log_oscillation().limit == 0.0
    assert sq.linear().limit is None


def test_slow_drift_and_log_oscillation_values():
    assert sq.slow_drift(1.0, 2.0).values(0) == pytest.approx(1 + 2 / math.log(2))
    assert sq.log_oscillation(2.0, 3.0).values(9) == pytest.approx(2 * math.sin(3 * math.log(10)))


def test_explicit_horizon():
    s = sq.explicit([1.0, 2.0, 3.0])
    assert s.horizon == 2
    assert s.values(2) == 3.0
    with pytest.raises(HorizonError):
        s.values(3)
    with pytest.raises(DomainError):
        s.values(-1)
    with pytest.raises(DomainError):
        sq.explicit([])


def test_explicit_capacity():
    with pytest.raises(CapacityError):
        sq.explicit(np.broadcast_to(0.0, (sq.MAX_EXPLICIT + 1,)))


def test_explicit_is_read_only():
    s = sq.explicit([1.0, 2.0])
    with pytest.raises(ValueError):
        s.data[0] = 5.0


@given(arrays(float, st.integers(1, 300), elements=finite))
def test_coefficient_partial_sums_reproduce_sequence(vals):
    s = sq.explicit(vals)
    view = s.coefficients()
    for n in (0, len(vals) // 2, len(vals) - 1):
        assert view.partial_sum(n) == vals[n]


@given(arrays(float, st.integers(1, 200), elements=finite))
def test_from_coefficients_roundtrip(a):
    s = sq.from_coefficients(a)
    assert s.values(len(a) - 1) == pytest.approx(math.fsum(a.tolist()), abs=1e-6)


@given(arrays(float, st.integers(2, 400), elements=finite), st.data())
def test_weighted_tail_sum_exact(vals, data):
    s = sq.explicit(vals)
    hi = data.draw(st.integers(0, len(vals) - 1))
    lo = data.draw(st.integers(0, hi))
    assert sq.weighted_tail_sum(s, lo, hi) == exact_weighted(vals.tolist(), lo, hi)


def test_weighted_tail_sum_guards():
    s = sq.explicit([1.0, 2.0])
    assert sq.weighted_tail_sum(s, 1, 1) == 0.0
    with pytest.raises(DomainError):
        sq.weighted_tail_sum(s, 2, 1)
    with pytest.raises(HorizonError):
        sq.weighted_tail_sum(s, 0, 5)


def test_u_function_steps():
    s = sq.constant(1.0)
    assert sq.u_function(s, 0.0) == 1.0
    assert sq.u_function(s, 2.9) == pytest.approx(1 + 1 / 2 + 1 / 3)
    with pytest.raises(DomainError):
        sq.u_function(s, -0.5)


def test_weighted_prefix_matches_harmonic_numbers():
    U = sq.weighted_prefix(sq.constant(1.0), 10**5)
    H = math.fsum(1.0 / k for k in range(1, 10**5 + 2))
    assert U[-1] == pytest.approx(H, rel=1e-15)
    assert U.shape == (10**5 + 1,)


@given(arrays(float, st.integers(1, 5000), elements=finite))
def test_compensated_cumsum_close_to_exact(t):
    c = sq.compensated_cumsum(t)
    for k in {0, len(t) // 3, len(t) - 1}:
        exact = math.fsum(t[: k + 1].tolist())
        scale = max(1.0, float(np.max(np.abs(np.cumsum(np.abs(t[: k + 1]))))))
        assert abs(c[k] - exact) <= 1e-13 * scale


def test_compensated_cumsum_beats_naive_drift():
    t = np.full(10**6, 0.1)
    exact = math.fsum(t.tolist())
    c = sq.compensated_cumsum(t)
    naive = np.cumsum(t)
    assert abs(c[-1] - exact) <= 1e-10
    assert abs(c[-1] - exact) * 100 < abs(naive[-1] - exact)


def test_fsum_array_chunks():
    x = np.full(sq.CHUNK * 2 + 7, 0.1)
    assert sq.fsum_array(x) == math.fsum([0.1] * (sq.CHUNK * 2 + 7))


@pytest.mark.parametrize("text, first", [
    ("const:2", 2.0), ("zero", 0.0), ("alt01", 1.0), ("altsign", 1.0),
    ("drift:1,2", 1 + 2 / math.log(2)), ("logosc:1,1", 0.0), ("linear:3,1", 3.0), ("power:2,1", 2.0),
])
def test_parse_sequence(text, first):
    assert sq.parse_sequence(text).values(0) == pytest.approx(first)


def test_parse_sequence_errors():
    with pytest.raises(KeyError):
        sq.parse_sequence("bogus")
    with pytest.raises(KeyError):
        sq.parse_sequence("drift:1,2,3,4")


def test_csv_roundtrip(tmp_path):
    s = sq.explicit([0.1, -2.5, 1e-300, 3.0])
    p = tmp_path / "s.csv"
    sq.save_csv(s, p)
    back = sq.parse_sequence(f"file:{p}")
    assert back.segment(0, 4).tolist() == s.segment(0, 4).tolist()


def test_csv_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x\n1\n")
    with pytest.raises(DomainError):
        sq.load_csv(p)


def test_save_closed_form_needs_length(tmp_path):
    with pytest.raises(DomainError):
        sq.save_csv(sq.constant(), tmp_path / "c.csv")
    sq.save_csv(sq.constant(), tmp_path / "c.csv", n=3)
    assert (tmp_path / "c.csv").read_text().splitlines() == ["s", "1.0", "1.0", "1.0", "1.0"]
