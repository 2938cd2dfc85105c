"""Summability transforms: ell, L, logarithmic moving average, Riesz R(log n),
Cesaro C1, Abel, Borel and the random-walk P-method.

Point evaluators return floats; :func:`evaluate` evaluates a method on a
grid and returns a :class:`TransformResult`. Sums of ``s_i / (i + 1)`` are
exactly rounded (``math.fsum``) in point evaluators and go through
compensated prefix tables on grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from .errors import CapacityError, DomainError, TruncationError
from .laws import LawSpec
from .sequences import (
    CHUNK,
    CoefficientView,
    Sequence,
    fsum_array,
    weighted_prefix,
    weighted_tail_sum,
)

__all__ = [
    "TransformResult",
    "boundary_index",
    "ell_transform",
    "L_transform",
    "abel_transform",
    "movavg_transform",
    "dn_identity_check",
    "ell_from_movavg_chain",
    "regularity_row_sum",
    "riesz_log_transform",
    "cesaro1_transform",
    "borel_transform",
    "p_method_transform",
    "evaluate",
    "DriftTable",
    "equivalence_drift",
    "uniformity_profile",
]

METHODS = ("ell", "L", "movavg", "riesz_log", "cesaro1", "abel", "borel", "pmethod")
_WINDOW = 50
MAX_TERMS = 10**8


@dataclass
class TransformResult:
    """Values of one method on a grid of points.

    ``normalized`` differs from ``raw`` only for ``movavg`` (divided by
    ``1 - 1/lambda``).
    """

    method: str
    points: np.ndarray
    raw: np.ndarray
    normalized: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.raw = np.asarray(self.raw, dtype=float)
        self.normalized = np.asarray(self.normalized, dtype=float)
        if not (len(self.points) == len(self.raw) == len(self.normalized)):
            raise DomainError("points, raw and normalized must have equal length")
        if np.any(np.diff(self.points) <= 0):
            raise DomainError("points must be strictly increasing")

    def rows(self):
        return [
            {"point": p, "raw": r, "normalized": q}
            for p, r, q in zip(self.points.tolist(), self.raw.tolist(), self.normalized.tolist())
        ]


# --- boundary index -------------------------------------------------------

def boundary_index(n: int, lam: float, tol: float = 1e-12) -> int:
    """``floor(n**(1/lam))`` with explicit correction at integer boundaries.

    Start from ``floor(exp(log n / lam))`` and move by one while
    ``lam log m > log n`` or ``lam log(m + 1) <= log n`` (comparisons with
    relative slack ``tol``). Integer ``lam`` uses exact integer powers.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if lam <= 0:
        raise DomainError("lambda must be positive")
    m = int(math.floor(math.exp(math.log(n) / lam)))
    if float(lam).is_integer():
        k = int(lam)
        while m > 0 and m**k > n:
            m -= 1
        while (m + 1) ** k <= n:
            m += 1
        return m
    ln = math.log(n)
    slack = tol * max(1.0, ln)
    while m > 1 and lam * math.log(m) > ln + slack:
        m -= 1
    while lam * math.log(m + 1) <= ln + slack:
        m += 1
    return m


# --- ell / moving average -------------------------------------------------

def _check_n(n):
    if int(n) != n or n < 2:
        raise DomainError("ell and moving-average transforms need integer n >= 2")
    return int(n)


def ell_transform(seq: Sequence, n: int, convention: str = "log_n") -> float:
    """Logarithmic mean ``t_n``.

    ``log_n``: ``(1/log n) sum_{i=0}^{n} s_i/(i+1)``;
    ``log_n_plus_1``: ``(1/log(n+1)) sum_{i=1}^{n} s_i/(i+1)``.
    """
    n = _check_n(n)
    if convention == "log_n":
        return math.fsum((seq.values(0), weighted_tail_sum(seq, 0, n))) / math.log(n)
    if convention == "log_n_plus_1":
        return weighted_tail_sum(seq, 0, n) / math.log(n + 1)
    raise DomainError(f"unknown ell convention {convention!r}")


def movavg_transform(seq: Sequence, n: int, lam: float) -> tuple[float, float]:
    """Logarithmic moving average over ``n**(1/lam) < i <= n``.

    Returns ``(raw, normalized)`` with ``normalized = raw / (1 - 1/lam)``.
    When ``n**(1/lam)`` is an integer that index is excluded.
    """
    n = _check_n(n)
    if lam <= 1:
        raise DomainError("lambda must exceed 1")
    m = boundary_index(n, lam)
    raw = weighted_tail_sum(seq, m, n) / math.log(n)
    return raw, raw / (1.0 - 1.0 / lam)


def regularity_row_sum(n: int, lam: float) -> float:
    """``1 - log floor(n^(1/lam)) / log n``, which tends to ``1 - 1/lam``."""
    m = boundary_index(n, lam)
    if m < 1:
        raise DomainError("n**(1/lambda) must be at least 1")
    return 1.0 - math.log(m) / math.log(n)


def dn_identity_check(seq: Sequence, n: int, lam: float) -> float:
    """Relative gap between the moving average and ``t_n - (log m/log n) t_m``.

    ``m = floor(n**(1/lam))`` must be at least 2. The gap is divided by
    ``max(1, |t_n|)``.
    """
    n = _check_n(n)
    m = boundary_index(n, lam)
    if m < 2:
        raise DomainError(f"floor(n^(1/lambda)) = {m} < 2")
    raw, _ = movavg_transform(seq, n, lam)
    tn = ell_transform(seq, n)
    tm = ell_transform(seq, m)
    other = tn - (math.log(m) / math.log(n)) * tm
    return abs(raw - other) / max(1.0, abs(tn))


def ell_from_movavg_chain(seq: Sequence, n: int, lam: float) -> float:
    """Rebuild ``t_n`` from moving averages along ``n, [n^(1/lam)], ...``.

    ``t_n = d_n + (log m_1/log n) d_{m_1} + (log m_2/log n) d_{m_2} + ...``
    stops once the index drops below 2; the initial segment
    ``U(m_last) / log n`` is added back.
    """
    n = _check_n(n)
    ln = math.log(n)
    parts = []
    k = n
    while k >= 2:
        raw, _ = movavg_transform(seq, k, lam)
        parts.append(raw * math.log(k) / ln)
        k = boundary_index(k, lam)
    head = seq.values(0) if k == 0 else math.fsum((seq.values(0), seq.values(1) / 2.0))
    parts.append(head / ln)
    return math.fsum(parts)


# --- power-series methods -------------------------------------------------

def _power_series(seq: Sequence, x: float, kind: str, tol: float) -> float:
    if not 0.0 < x < 1.0:
        raise DomainError("x must lie in (0, 1)")
    if tol <= 0:
        raise DomainError("tol must be positive")
    one_minus = 1.0 - x
    logx = math.log1p(-one_minus)
    norm = -1.0 / math.log1p(-x) if kind == "L" else one_minus
    k_needed = 0
    parts = []
    prev = np.empty(0)
    p = seq.growth
    start = 0
    while True:
        if start >= MAX_TERMS:
            raise TruncationError(f"{kind}-series did not truncate within {MAX_TERMS} terms")
        stop = start + CHUNK
        if seq.horizon is not None:
            stop = min(stop, seq.horizon + 1)
            if stop <= start:
                raise TruncationError("explicit sequence exhausted before truncation")
        i = np.arange(start, stop, dtype=float)
        s = seq.segment(start, stop)
        if kind == "L":
            w = np.exp((i + 1.0) * logx) / (i + 1.0)
        else:
            w = np.exp(i * logx)
        terms = s * w * norm
        # max |s| over the trailing window of 50 indices
        window = np.concatenate([prev, np.abs(s)])
        if window.size >= _WINDOW:
            wmax = sliding_window_view(window, _WINDOW).max(axis=1)[-s.size:]
            if wmax.size < s.size:
                wmax = np.concatenate([np.maximum.accumulate(np.abs(s[: s.size - wmax.size])), wmax])
        else:
            wmax = np.maximum.accumulate(window)[-s.size:]
        prev = window[-(_WINDOW - 1):]
        grow = (1.0 + 1.0 / (one_minus * (i + 1.0))) ** p if p > 0 else 1.0
        bound = wmax * w * norm * grow / one_minus
        small = bound < tol
        # length of the run of consecutive small bounds ending at each index
        idx = np.arange(small.size)
        last_false = np.maximum.accumulate(np.where(~small, idx, -1))
        runs = np.where(last_false >= 0, idx - last_false, k_needed + idx + 1)
        hit = np.nonzero(runs >= _WINDOW)[0]
        if hit.size:
            cut = hit[0] + 1
            parts.append(fsum_array(terms[:cut]))
            return math.fsum(parts)
        parts.append(fsum_array(terms))
        k_needed = int(runs[-1])
        start = stop


def L_transform(seq: Sequence, x: float, tol: float = 1e-10) -> float:
    """``(1/-log(1-x)) sum_{i>=0} s_i x^(i+1)/(i+1)``.

    Truncated once the tail majorant ``max|s| x^(i+1) / ((i+1)(1-x))``
    (normalised, with the max over the last 50 indices and a polynomial
    growth correction) stays below ``tol`` for 50 consecutive terms.
    """
    return _power_series(seq, x, "L", tol)


def abel_transform(seq: Sequence, x: float, tol: float = 1e-10) -> float:
    """``(1 - x) sum_{i>=0} s_i x^i`` with the same truncation rule as L."""
    return _power_series(seq, x, "abel", tol)


def borel_transform(seq: Sequence, t: float, tol: float = 1e-12) -> float:
    """``exp(-t) sum_k s_k t^k / k!`` with Poisson weights in log space.

    Terms are added in blocks until ``max|s| (last 50 indices) * P(N > K)``
    drops below ``tol`` (``N ~ Poisson(t)``).
    """
    if not t > 0 or not math.isfinite(t):
        raise DomainError("t must be positive and finite")
    K = int(math.ceil(t + 10.0 * math.sqrt(t) + 50))
    logt = math.log(t)
    while True:
        if K > MAX_TERMS:
            raise TruncationError("Borel series did not truncate")
        if seq.horizon is not None and K > seq.horizon:
            K = seq.horizon
        k = np.arange(K + 1, dtype=float)
        logw = -t + k * logt - special.gammaln(k + 1.0)
        w = np.exp(logw)
        s = seq.segment(0, K + 1)
        tail = special.pdtrc(K, t)
        guard = np.abs(s[-_WINDOW:]).max() * tail * (1.0 + seq.growth)
        if guard < tol:
            return fsum_array(s * w)
        if seq.horizon is not None and K == seq.horizon:
            raise TruncationError("explicit sequence exhausted before Borel truncation")
        K = int(K * 1.5) + 50


def _law_distribution(law: LawSpec, n: int, tol: float):
    """``P(S_n = i)`` with offset, via iterated trimmed convolution."""
    base = law.pmf_nonneg(tol / (2.0 * n))
    support = np.arange(base.size)
    mu = float(np.dot(support, base))
    if mu <= 0:
        raise DomainError("the P-method needs a law with positive mean")
    trim = tol / (4.0 * n)
    dist = np.array([1.0])
    offset = 0
    for _ in range(n):
        dist = np.convolve(dist, base)
        lo_cut = np.searchsorted(np.cumsum(dist), trim, side="right")
        hi_cut = dist.size - np.searchsorted(np.cumsum(dist[::-1]), trim, side="right")
        lo_cut = min(lo_cut, hi_cut - 1)
        dist = dist[lo_cut:hi_cut]
        offset += int(lo_cut)
    mass = math.fsum(dist.tolist())
    if mass < 1.0 - tol:
        raise DomainError(f"support truncation lost {1 - mass:.3g} >= tol of probability")
    return dist, offset


def p_method_transform(seq: Sequence, law: LawSpec, n: int, tol: float = 1e-12) -> float:
    """Random-walk mean ``sum_i s_i P(S_n = i)``, ``S_n`` a sum of n draws."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    if n > 10**5:
        raise CapacityError("P-method convolution is limited to n <= 1e5")
    dist, offset = _law_distribution(law, int(n), tol)
    s = seq.segment(offset, offset + dist.size)
    return fsum_array(s * dist)


# --- Riesz and Cesaro -----------------------------------------------------

def _riesz_top(x: float) -> int:
    """Largest k with log(k + 1) < x."""
    k = int(math.ceil(math.exp(x))) - 2
    while k >= 0 and math.log(k + 1) >= x:
        k -= 1
    while math.log(k + 2) < x:
        k += 1
    return k


def riesz_log_transform(coeffs: CoefficientView | Sequence, x: float) -> float:
    """Riesz mean ``(1/x) int_0^x S(y) dy`` with ``S(y) = sum_{log(k+1)<y} a_k``.

    ``S`` equals ``s_k`` on ``(log(k+1), log(k+2)]``, so the integral is the
    exact sum of ``s_k`` times segment lengths.
    """
    seq = coeffs.base if isinstance(coeffs, CoefficientView) else coeffs
    if not x > 0:
        raise DomainError("x must be positive")
    K = _riesz_top(x)
    if K + 1 > MAX_TERMS:
        raise CapacityError("Riesz mean needs more than 1e8 terms")
    parts = []
    for a in range(0, K, CHUNK):
        b = min(a + CHUNK, K)
        k = np.arange(a, b, dtype=float)
        parts.append(fsum_array(seq.segment(a, b) * np.log1p(1.0 / (k + 1.0))))
    parts.append(seq.values(K) * (x - math.log(K + 1)))
    return math.fsum(parts) / x


def cesaro1_transform(seq: Sequence, n: int) -> float:
    """``(1/(n+1)) sum_{i<=n} s_i``."""
    if int(n) != n or n < 0:
        raise DomainError("n must be a non-negative integer")
    return fsum_array(seq.segment(0, int(n) + 1)) / (n + 1)


# --- grids ----------------------------------------------------------------

def evaluate(method: str, seq: Sequence, points, *, lam: float | None = None,
             convention: str = "log_n", law: LawSpec | None = None,
             tol: float = 1e-10) -> TransformResult:
    """Evaluate ``method`` at every point.

    Points are integers ``n`` for ell, movavg, cesaro1, pmethod; abscissae
    ``x`` in (0, 1) for L and abel; ``x > 0`` for riesz_log; ``t > 0`` for
    borel. ell and movavg on integer grids share one prefix table.
    """
    pts = np.asarray(points, dtype=float)
    meta = {"lambda": lam, "convention": convention,
            "law": law.name if law is not None else None, "tol": tol}
    if method in ("ell", "movavg"):
        ns = pts.astype(np.int64)
        if np.any(ns != pts) or np.any(ns < 2):
            raise DomainError(f"{method} needs integer points >= 2")
        if method == "movavg" and (lam is None or lam <= 1):
            raise DomainError("movavg needs lambda > 1")
        U = weighted_prefix(seq, int(ns.max()))
        logs = np.log(ns.astype(float))
        if method == "ell":
            if convention == "log_n":
                raw = U[ns] / logs
            elif convention == "log_n_plus_1":
                raw = (U[ns] - seq.values(0)) / np.log(ns + 1.0)
            else:
                raise DomainError(f"unknown ell convention {convention!r}")
            norm = raw
        else:
            ms = np.array([boundary_index(int(v), lam) for v in ns])
            raw = (U[ns] - U[ms]) / logs
            norm = raw / (1.0 - 1.0 / lam)
        return TransformResult(method, pts, raw, norm, meta)
    if method == "L":
        f = lambda p: L_transform(seq, p, tol)
    elif method == "abel":
        f = lambda p: abel_transform(seq, p, tol)
    elif method == "borel":
        f = lambda p: borel_transform(seq, p, tol)
    elif method == "riesz_log":
        f = lambda p: riesz_log_transform(seq, p)
    elif method == "cesaro1":
        f = lambda p: cesaro1_transform(seq, int(p))
    elif method == "pmethod":
        if law is None:
            raise DomainError("pmethod needs a law")
        f = lambda p: p_method_transform(seq, law, int(p), tol)
    else:
        raise KeyError(f"unknown method {method!r}")
    raw = np.array([f(float(p)) for p in pts])
    return TransformResult(method, pts, raw, raw.copy(), meta)


def _at_horizon(spec: str, seq: Sequence, ns: np.ndarray, law: LawSpec | None) -> np.ndarray:
    """Value of a method spec at integer horizons ``n`` (mapped per method)."""
    name, _, arg = spec.partition(":")
    if name == "ell":
        return evaluate("ell", seq, ns, convention=arg or "log_n").normalized
    if name == "movavg":
        return evaluate("movavg", seq, ns, lam=float(arg)).normalized
    if name == "riesz_log":
        return np.array([riesz_log_transform(seq, math.log(n + 1.0)) for n in ns])
    if name in ("L", "abel"):
        return evaluate(name, seq, 1.0 - 1.0 / ns.astype(float)).normalized
    if name == "borel":
        return evaluate("borel", seq, ns.astype(float), tol=1e-12).normalized
    if name == "cesaro1":
        return evaluate("cesaro1", seq, ns).normalized
    if name == "pmethod":
        return evaluate("pmethod", seq, ns, law=law, tol=1e-12).normalized
    raise KeyError(f"unknown method spec {spec!r}")


@dataclass
class DriftTable:
    """Gaps ``|method_1 - method_2|`` per sequence (rows) and horizon (cols)."""

    methods: tuple[str, str]
    horizons: np.ndarray
    sequences: list[str]
    gaps: np.ndarray
    bound: float

    @property
    def final_below_bound(self) -> np.ndarray:
        return self.gaps[:, -1] <= self.bound

    @property
    def decreasing(self) -> np.ndarray:
        return np.all(np.diff(self.gaps, axis=1) < 0, axis=1)

    def rows(self):
        out = []
        for name, g in zip(self.sequences, self.gaps):
            for n, v in zip(self.horizons.tolist(), g.tolist()):
                out.append({"sequence": name, "n": n, "gap": v})
        return out


def equivalence_drift(seqs, methods=("ell", "movavg:2"), horizons=(10**3, 10**4, 10**5, 10**6),
                      bound: float = 0.02, law: LawSpec | None = None) -> DriftTable:
    """Gap between two methods along a horizon schedule.

    Method specs: ``ell[:convention]``, ``movavg:<lambda>`` (normalized),
    ``riesz_log`` (at ``x = log(n+1)``), ``L`` / ``abel`` (at ``x = 1 - 1/n``),
    ``borel`` (``t = n``), ``cesaro1``, ``pmethod`` (needs ``law``).
    """
    ns = np.asarray(horizons, dtype=np.int64)
    gaps = np.array([
        np.abs(_at_horizon(methods[0], s, ns, law) - _at_horizon(methods[1], s, ns, law))
        for s in seqs
    ])
    return DriftTable(tuple(methods), ns, [repr(s) for s in seqs], gaps, bound)


def uniformity_profile(seq: Sequence, n: int, lambda_interval=(1.1, 5.0), grid_size: int = 100,
                       reference: float | None = None) -> float:
    """``max_lambda |normalized movavg(n, lambda) - s|`` on a uniform grid."""
    a, b = lambda_interval
    if not b > a > 1:
        raise DomainError("lambda interval must satisfy b > a > 1")
    ref = seq.limit if reference is None else reference
    if ref is None:
        raise DomainError(f"{seq!r} declares no limit; pass reference=")
    n = _check_n(n)
    U = weighted_prefix(seq, n)
    lams = np.linspace(a, b, int(grid_size))
    ms = np.array([boundary_index(n, lam) for lam in lams])
    norm = (U[n] - U[ms]) / math.log(n) / (1.0 - 1.0 / lams)
    return float(np.max(np.abs(norm - ref)))
