"""Real sequences s_0, s_1, ... and compensated weighted partial sums.

A :class:`Sequence` is an immutable evaluation rule. Closed-form families
evaluate any index on demand; explicit sequences carry a stored array and
refuse indices past its end. All weighted sums ``sum s_i / (i + 1)`` go
through :func:`weighted_tail_sum` (exactly rounded ``math.fsum`` over
chunks) or :func:`weighted_prefix` (blocked cumulative sums with exact
block offsets).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import CapacityError, DomainError, HorizonError

__all__ = [
    "Sequence",
    "CoefficientView",
    "constant",
    "zero",
    "alternating_01",
    "alternating_sign",
    "slow_drift",
    "log_oscillation",
    "linear",
    "power",
    "explicit",
    "from_coefficients",
    "custom",
    "load_csv",
    "save_csv",
    "parse_sequence",
    "weighted_tail_sum",
    "weighted_prefix",
    "u_function",
    "fsum_array",
]

MAX_EXPLICIT = 10**8
CHUNK = 1 << 20
_BLOCK = 1024


@dataclass(frozen=True, eq=False)
class Sequence:
    """A real sequence given by a vectorised evaluation rule.

    ``limit`` is the declared ell-limit of the family (``None`` if the
    family does not declare one) and ``growth`` an exponent ``p`` with
    ``|s_n| = O((n + 1)**p)``, used by the power-series truncation guards.
    """

    kind: str
    params: tuple = ()
    limit: float | None = None
    growth: float = 0.0
    rule: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    data: np.ndarray | None = field(default=None, repr=False)

    @property
    def horizon(self) -> int | None:
        """Largest admissible index, or ``None`` for closed-form families."""
        return None if self.data is None else len(self.data) - 1

    def values(self, idx):
        """Evaluate ``s_idx`` for an int or an integer array."""
        arr = np.asarray(idx)
        if arr.size and arr.min() < 0:
            raise DomainError("sequence indices must be >= 0")
        if self.data is not None:
            if arr.size and arr.max() > len(self.data) - 1:
                raise HorizonError(
                    f"index {int(arr.max())} beyond explicit length {len(self.data)}"
                )
            out = self.data[arr]
        else:
            out = np.asarray(self.rule(arr.astype(np.int64)), dtype=float)
            out = np.broadcast_to(out, arr.shape).astype(float)
        return float(out) if np.ndim(idx) == 0 else out

    def segment(self, lo: int, hi: int) -> np.ndarray:
        """Values s_lo, ..., s_{hi-1}."""
        if hi <= lo:
            return np.empty(0)
        return self.values(np.arange(lo, hi, dtype=np.int64))

    def coefficients(self) -> "CoefficientView":
        return CoefficientView(self)

    def __repr__(self):
        return f"Sequence({self.kind}{':' + ','.join(map(str, self.params)) if self.params else ''})"


@dataclass(frozen=True)
class CoefficientView:
    """Coefficients ``a_0 = s_0``, ``a_k = s_k - s_{k-1}`` of a sequence."""

    base: Sequence

    def a(self, k):
        hi, _ = self.a_exact(k)
        return float(hi) if np.ndim(k) == 0 else hi

    def a_exact(self, k):
        """``(hi, lo)`` with ``hi + lo == s_k - s_{k-1}`` exactly (TwoSum)."""
        k = np.asarray(k, dtype=np.int64)
        cur = np.atleast_1d(self.base.values(np.atleast_1d(k)))
        prev_idx = np.maximum(np.atleast_1d(k) - 1, 0)
        prev = np.where(np.atleast_1d(k) > 0, np.atleast_1d(self.base.values(prev_idx)), 0.0)
        hi = cur - prev
        bb = hi - cur
        lo = (cur - (hi - bb)) + (-prev - bb)
        return hi.reshape(k.shape), lo.reshape(k.shape)

    def partial_sum(self, n: int) -> float:
        """``sum_{k <= n} a_k`` exactly rounded; equals ``s_n`` bit for bit."""
        hi, lo = self.a_exact(np.arange(n + 1))
        return math.fsum(np.concatenate([hi, lo]).tolist())


def _const_rule(c):
    return lambda n: np.full(n.shape, float(c))


def constant(c: float = 1.0) -> Sequence:
    return Sequence("constant", (float(c),), limit=float(c), rule=_const_rule(c))


def zero() -> Sequence:
    return constant(0.0)


def alternating_01() -> Sequence:
    """1, 0, 1, 0, ... (ell-limit 1/2)."""
    return Sequence("alternating_01", (), limit=0.5, rule=lambda n: (n % 2 == 0).astype(float))


def alternating_sign() -> Sequence:
    """(-1)**n (ell-limit 0)."""
    return Sequence("alternating_sign", (), limit=0.0, rule=lambda n: 1.0 - 2.0 * (n % 2))


def slow_drift(c: float = 1.0, b: float = 2.0) -> Sequence:
    """``c + b / log(n + 2)``, converging to ``c`` with drift ``O(1/log n)``."""
    return Sequence(
        "slow_drift", (float(c), float(b)), limit=float(c),
        rule=lambda n: c + b / np.log(n + 2.0),
    )


def log_oscillation(amplitude: float = 1.0, frequency: float = 1.0) -> Sequence:
    """``A sin(w log(n + 1))``: ell-summable to 0 but not Cesaro-summable."""
    return Sequence(
        "log_oscillation", (float(amplitude), float(frequency)), limit=0.0,
        rule=lambda n: amplitude * np.sin(frequency * np.log(n + 1.0)),
    )


def linear(intercept: float = 0.0, slope: float = 1.0) -> Sequence:
    return Sequence(
        "linear", (float(intercept), float(slope)),
        limit=float(intercept) if slope == 0 else None,
        growth=1.0 if slope else 0.0,
        rule=lambda n: intercept + slope * n.astype(float),
    )


def power(c: float = 1.0, p: float = 1.0, alternating: bool = False) -> Sequence:
    """``c (n + 1)**p``, optionally times ``(-1)**n``."""
    def rule(n):
        v = c * (n + 1.0) ** p
        return v * (1.0 - 2.0 * (n % 2)) if alternating else v

    lim = 0.0 if (p < 0 or c == 0) else (float(c) if p == 0 and not alternating else None)
    return Sequence(
        "power", (float(c), float(p), bool(alternating)), limit=lim,
        growth=max(float(p), 0.0), rule=rule,
    )


def explicit(values, limit: float | None = None) -> Sequence:
    arr = np.array(values, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("explicit sequence needs at least one value")
    if arr.size > MAX_EXPLICIT:
        raise CapacityError(f"explicit sequences are limited to {MAX_EXPLICIT} entries")
    arr.setflags(write=False)
    return Sequence("explicit", (arr.size,), limit=limit, data=arr)


def from_coefficients(a, limit: float | None = None) -> Sequence:
    """Explicit sequence of partial sums of the coefficients ``a``."""
    a = np.asarray(a, dtype=float)
    sums = np.empty_like(a)
    acc = 0.0
    for i, v in enumerate(a.tolist()):
        acc = math.fsum((acc, v)) if i else v
        sums[i] = acc
    seq = explicit(sums, limit=limit)
    return Sequence("coefficients", seq.params, limit=limit, data=seq.data)


def custom(rule: Callable[[np.ndarray], np.ndarray], limit: float | None = None,
           growth: float = 0.0, name: str = "custom") -> Sequence:
    """Sequence from a vectorised rule ``rule(int_array) -> float_array``."""
    return Sequence(name, (), limit=limit, growth=growth, rule=rule)


def load_csv(path, limit: float | None = None) -> Sequence:
    """Read a one-column CSV with header ``s``; row order is the index."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["s"]:
            raise DomainError(f"{path}: expected a single column with header 's'")
        vals = [float(row[0]) for row in reader if row]
    return explicit(vals, limit=limit)


def save_csv(seq: Sequence, path, n: int | None = None) -> None:
    n = seq.horizon if n is None else n
    if n is None:
        raise DomainError("closed-form sequences need an explicit length")
    vals = seq.segment(0, n + 1)
    with open(path, "w", newline="") as fh:
        fh.write("s\n")
        for v in vals.tolist():
            fh.write(f"{v!r}\n")


_PARSERS = {
    "const": lambda p: constant(*p) if p else constant(),
    "zero": lambda p: zero(),
    "alt01": lambda p: alternating_01(),
    "altsign": lambda p: alternating_sign(),
    "drift": lambda p: slow_drift(*p),
    "logosc": lambda p: log_oscillation(*p),
    "linear": lambda p: linear(*p),
    "power": lambda p: power(p[0], p[1], bool(p[2]) if len(p) > 2 else False),
}


def parse_sequence(text: str) -> Sequence:
    """Parse ``name[:p1,p2,...]``, e.g. ``const:1``, ``drift:1,2``, ``file:x.csv``.

    Names: const, zero, alt01, altsign, drift, logosc, linear, power, file.
    """
    name, _, rest = text.partition(":")
    if name == "file":
        return load_csv(Path(rest))
    if name not in _PARSERS:
        raise KeyError(f"unknown sequence {name!r}")
    params = [float(v) for v in rest.split(",")] if rest else []
    try:
        return _PARSERS[name](params)
    except TypeError as exc:
        raise KeyError(f"bad parameters for sequence {name!r}: {rest!r}") from exc


def fsum_array(arr: np.ndarray) -> float:
    """Exactly rounded sum of a float array (chunked ``math.fsum``)."""
    if arr.size <= CHUNK:
        return math.fsum(arr.tolist())
    parts = [math.fsum(arr[i:i + CHUNK].tolist()) for i in range(0, arr.size, CHUNK)]
    return math.fsum(parts)


def _weighted_terms(seq: Sequence, lo: int, hi: int) -> np.ndarray:
    idx = np.arange(lo, hi, dtype=np.int64)
    return seq.values(idx) / (idx + 1.0)


def weighted_tail_sum(seq: Sequence, lo: int, hi: int) -> float:
    """``sum_{lo < i <= hi} s_i / (i + 1)``; 0 for an empty range."""
    lo, hi = int(lo), int(hi)
    if lo < 0 or hi < lo:
        raise DomainError("weighted_tail_sum requires 0 <= lo <= hi")
    if seq.horizon is not None and hi > seq.horizon:
        raise HorizonError(f"hi={hi} beyond explicit length {seq.horizon + 1}")
    parts = []
    for a in range(lo + 1, hi + 1, CHUNK):
        b = min(a + CHUNK, hi + 1)
        parts.append(math.fsum(_weighted_terms(seq, a, b).tolist()))
    return math.fsum(parts)


def u_function(seq: Sequence, x: float) -> float:
    """``U(x) = sum_{0 <= i <= x} s_i / (i + 1)`` (right-continuous steps)."""
    if x < 0:
        raise DomainError("u_function requires x >= 0")
    n = int(math.floor(x))
    return math.fsum((seq.values(0), weighted_tail_sum(seq, 0, n)))


def weighted_prefix(seq: Sequence, n: int, terms: np.ndarray | None = None) -> np.ndarray:
    """Array ``U[0..n]`` with ``U[k] = sum_{i <= k} s_i / (i + 1)``.

    Block offsets are exact running sums (``fsum``); inside a block of 1024
    terms ordinary cumulative summation is used, so the error stays at a few
    ulps of ``max |U|``. Pass ``terms`` to reuse already weighted values.
    """
    n = int(n)
    if seq.horizon is not None and n > seq.horizon:
        raise HorizonError(f"n={n} beyond explicit length {seq.horizon + 1}")
    if n + 1 > MAX_EXPLICIT:
        raise CapacityError(f"prefix tables are limited to {MAX_EXPLICIT} entries")
    if terms is None:
        terms = _weighted_terms(seq, 0, n + 1)
    return compensated_cumsum(terms)


def compensated_cumsum(terms: np.ndarray) -> np.ndarray:
    """Cumulative sum with exact offsets every 1024 entries."""
    m = terms.size
    nb = -(-m // _BLOCK)
    padded = np.zeros(nb * _BLOCK)
    padded[:m] = terms
    blocks = padded.reshape(nb, _BLOCK)
    inner = np.cumsum(blocks, axis=1)
    offsets = np.empty(nb)
    hi = lo = 0.0
    for b in range(nb):
        offsets[b] = hi + lo
        x = math.fsum(blocks[b].tolist())
        t = hi + x
        lo += (hi - t) + x if abs(hi) >= abs(x) else (x - t) + hi
        hi = t
    return (inner + offsets[:, None]).ravel()[:m]
