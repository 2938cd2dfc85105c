"""Finite-grid evaluators for Tauberian condition functionals.

Each checker fills a (parameter x horizon) matrix of inner functionals,
reduces every row over the tail of the horizon grid (liminf or limsup
proxy) and turns the parameter trend into a verdict. Iterated limits are
never claimed; the profile keeps all raw values.

Default verdict rule: ``satisfied`` if the extrapolated proxy is
``>= -threshold``; ``violated`` if it is ``<= -0.1`` and the row that
produced it does not improve along the horizon grid; otherwise
``inconclusive``. A row improves when the minimum over its second half
exceeds the minimum over its first half.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, HorizonError
from .sequences import Sequence, fsum_array, weighted_prefix

__all__ = [
    "ConditionProfile",
    "one_sided_condition",
    "thm4_condition_ii",
    "thm6_gap_condition",
    "moricz_conditions",
    "moricz_upper_value",
    "moricz_lower_value",
]

DEFAULT_THRESHOLD = 1e-3
VIOLATION_LEVEL = -0.1


@dataclass
class ConditionProfile:
    condition: str
    params: np.ndarray
    horizons: np.ndarray
    values: np.ndarray
    proxies: np.ndarray
    extrapolated: float
    verdict: str
    threshold: float
    flags: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (len(self.params), len(self.horizons)):
            raise ValueError("values must be a len(params) x len(horizons) matrix")

    def rows(self):
        out = []
        for i, p in enumerate(self.params.tolist()):
            for j, h in enumerate(self.horizons.tolist()):
                out.append({"param": p, "horizon": h, "value": float(self.values[i, j])})
        return out


def _tail(n_cols: int) -> slice:
    return slice(n_cols // 2, None) if n_cols > 1 else slice(0, None)


def _lower_verdict(extrapolated, row, threshold):
    """Verdict for conditions of the form ``... >= 0``."""
    if extrapolated >= -threshold:
        return "satisfied"
    finite = row[np.isfinite(row)]
    # improving: the tail minimum has risen above the head minimum
    half = finite.size // 2
    not_improving = finite.size < 2 or finite[half:].min() <= finite[:half].min() + threshold
    if extrapolated <= VIOLATION_LEVEL and not_improving:
        return "violated"
    return "inconclusive"


def _reduce_lower(values, flags=None):
    """Row-wise min over the horizon tail, ignoring flagged cells."""
    tail = values[:, _tail(values.shape[1])]
    if flags is not None:
        tail = np.where(flags[:, _tail(values.shape[1])], np.nan, tail)
    with np.errstate(all="ignore"):
        prox = np.array([np.nanmin(r) if np.isfinite(r).any() else np.nan for r in tail])
    return prox


def _check_horizon(seq, top):
    if seq.horizon is not None and top > seq.horizon:
        raise HorizonError(f"condition needs index {top} beyond explicit length {seq.horizon + 1}")


def one_sided_condition(seq: Sequence, lambda_grid, n_grid,
                        threshold: float = DEFAULT_THRESHOLD) -> ConditionProfile:
    """``min_{n <= m <= lambda n} (1/log n) sum_{n <= i <= m} s_i/(i+1)``.

    ``lambda_grid`` should decrease towards 1; the proxy of the last
    (closest to 1) parameter is the extrapolated value.
    """
    lams = np.asarray(lambda_grid, dtype=float)
    ns = np.asarray(n_grid, dtype=np.int64)
    if lams.size == 0 or ns.size == 0:
        raise DomainError("grids must be non-empty")
    if np.any(lams <= 1) or np.any(ns < 2):
        raise DomainError("need lambda > 1 and n >= 2")
    top = int(math.floor(lams.max() * ns.max()))
    _check_horizon(seq, top)
    U = weighted_prefix(seq, top)
    vals = np.empty((lams.size, ns.size))
    for i, lam in enumerate(lams):
        for j, n in enumerate(ns):
            m_hi = int(math.floor(lam * n))
            partial = U[n:m_hi + 1] - U[n - 1]
            vals[i, j] = partial.min() / math.log(n)
    prox = _reduce_lower(vals)
    order = np.argsort(lams)
    ext = float(prox[order[0]])
    verdict = _lower_verdict(ext, vals[order[0]], threshold)
    return ConditionProfile("one_sided_2_3", lams, ns.astype(float), vals, prox, ext, verdict, threshold)


def thm4_condition_ii(seq: Sequence, alpha_grid, x_grid, growth_factor: float = 2.0,
                      threshold: float = DEFAULT_THRESHOLD) -> ConditionProfile:
    """``sup_{theta in [1, alpha]} [U(x) - U(x^(1/theta))] / log x``.

    As theta runs over ``[1, alpha]``, ``floor(x^(1/theta))`` takes every
    integer ``k`` from ``floor(x^(1/alpha))`` to ``floor(x)``, so the sup is
    ``U(floor x) - min_k U(k)`` exactly. Per alpha the proxy is the max over
    the x-tail; the extrapolated value is the smallest proxy (liminf as
    alpha decreases). ``satisfied`` if it is finite and the producing row
    has not grown by ``growth_factor`` along the x grid (bounded);
    ``violated`` if it grew and exceeds 1.
    """
    alphas = np.asarray(alpha_grid, dtype=float)
    xs = np.asarray(x_grid, dtype=float)
    if alphas.size == 0 or xs.size == 0:
        raise DomainError("grids must be non-empty")
    if np.any(alphas <= 1) or np.any(xs <= 1):
        raise DomainError("need alpha > 1 and x > 1")
    top = int(math.floor(xs.max()))
    _check_horizon(seq, top)
    U = weighted_prefix(seq, top)
    vals = np.empty((alphas.size, xs.size))
    for i, a in enumerate(alphas):
        for j, x in enumerate(xs):
            kx = int(math.floor(x))
            k0 = int(math.floor(x ** (1.0 / a)))
            vals[i, j] = (U[kx] - U[k0:kx + 1].min()) / math.log(x)
    tail = vals[:, _tail(xs.size)]
    prox = tail.max(axis=1)
    best = int(np.argmin(prox))
    ext = float(prox[best])
    row = vals[best]
    grew = abs(row[-1]) > growth_factor * max(abs(row[0]), threshold)
    if np.isfinite(ext) and not grew:
        verdict = "satisfied"
    elif grew and ext > 1.0:
        verdict = "violated"
    else:
        verdict = "inconclusive"
    return ConditionProfile("thm4_ii", alphas, xs, vals, prox, ext, verdict, threshold)


def thm6_gap_condition(seq: Sequence, r: float, delta_grid, n_grid,
                       threshold: float = DEFAULT_THRESHOLD) -> ConditionProfile:
    """``min_{n <= m < n + delta sqrt(n)} (s_m - s_n) / n^r``.

    Cells whose window holds only ``m = n`` (``delta sqrt(n) <= 1``) get the
    value 0 and are flagged; flagged cells are ignored by the proxies.
    """
    if r < 0:
        raise DomainError("r must be >= 0")
    deltas = np.asarray(delta_grid, dtype=float)
    ns = np.asarray(n_grid, dtype=np.int64)
    if deltas.size == 0 or ns.size == 0 or np.any(deltas <= 0):
        raise DomainError("need a non-empty grid of positive deltas")
    tops = [int(math.ceil(n + d * math.sqrt(n))) for d in deltas for n in ns]
    _check_horizon(seq, max(tops))
    vals = np.zeros((deltas.size, ns.size))
    flags = np.zeros_like(vals, dtype=bool)
    for i, d in enumerate(deltas):
        for j, n in enumerate(ns):
            end = int(math.ceil(n + d * math.sqrt(n)))  # exclusive bound
            if end - n <= 1:
                flags[i, j] = True
                continue
            window = seq.segment(int(n), end)
            vals[i, j] = (window.min() - window[0]) / float(n) ** r
    prox = _reduce_lower(vals, flags)
    order = np.argsort(deltas)
    usable = [k for k in order if np.isfinite(prox[k])]
    if not usable:
        return ConditionProfile("thm6_gap", deltas, ns.astype(float), vals, prox, 0.0,
                                "inconclusive", threshold, flags)
    k = usable[0]
    ext = float(prox[k])
    row = np.where(flags[k], np.nan, vals[k])
    verdict = _lower_verdict(ext, row, threshold)
    return ConditionProfile("thm6_gap", deltas, ns.astype(float), vals, prox, ext, verdict, threshold, flags)


def _log_integral_step(seq: Sequence, a: float, b: float) -> float:
    """``int_a^b s(u) du/u`` for the step function ``s(u) = s_floor(u)``, ``1 <= a <= b``."""
    ka, kb = int(math.floor(a)), int(math.floor(b))
    if ka == kb:
        return seq.values(ka) * math.log(b / a)
    parts = [seq.values(ka) * math.log((ka + 1) / a)]
    if kb > ka + 1:
        k = np.arange(ka + 1, kb, dtype=float)
        parts.append(fsum_array(seq.segment(ka + 1, kb) * np.log1p(1.0 / k)))
    if b > kb:
        parts.append(seq.values(kb) * math.log(b / kb))
    return math.fsum(parts)


def moricz_upper_value(seq: Sequence, lam: float, x: float) -> float:
    """``(1/((lam-1) log x)) int_x^{x^lam} (s(u) - s(x)) du/u``, ``lam > 1``."""
    if lam <= 1 or x <= 1:
        raise DomainError("need lambda > 1 and x > 1")
    X = x ** lam
    _check_horizon(seq, int(math.floor(X)))
    sx = seq.values(int(math.floor(x)))
    integral = _log_integral_step(seq, x, X)
    return (integral - sx * (lam - 1.0) * math.log(x)) / ((lam - 1.0) * math.log(x))


def moricz_lower_value(seq: Sequence, lam: float, x: float) -> float:
    """``(1/((1-lam) log x)) int_{x^lam}^x (s(x) - s(u)) du/u``, ``0 < lam < 1``."""
    if not 0 < lam < 1 or x <= 1:
        raise DomainError("need 0 < lambda < 1 and x > 1")
    X = x ** lam
    _check_horizon(seq, int(math.floor(x)))
    sx = seq.values(int(math.floor(x)))
    integral = _log_integral_step(seq, X, x)
    return (sx * (1.0 - lam) * math.log(x) - integral) / ((1.0 - lam) * math.log(x))


def _moricz_profile(name, seq, lams, xs, fn, threshold):
    vals = np.array([[fn(seq, lam, x) for x in xs] for lam in lams])
    prox = _reduce_lower(vals)
    # limsup as lambda -> 1: max over the half of the grid closest to 1
    order = np.argsort(np.abs(lams - 1.0))
    near = order[: max(1, (len(order) + 1) // 2)]
    k = near[int(np.argmax(prox[near]))]
    ext = float(prox[k])
    verdict = _lower_verdict(ext, vals[k], threshold)
    return ConditionProfile(name, lams, xs, vals, prox, ext, verdict, threshold)


def moricz_conditions(seq: Sequence, lambda_grid_upper, lambda_grid_lower, x_grid,
                      threshold: float = DEFAULT_THRESHOLD):
    """Both one-sided conditions for ell-convergence to imply convergence.

    Returns ``(upper, lower)`` profiles; the integrals are exact for the
    step function ``s(u) = s_floor(u)``.
    """
    up = np.asarray(lambda_grid_upper, dtype=float)
    lo = np.asarray(lambda_grid_lower, dtype=float)
    xs = np.asarray(x_grid, dtype=float)
    if np.any(up <= 1) or np.any((lo <= 0) | (lo >= 1)):
        raise DomainError("upper lambdas must exceed 1, lower lambdas lie in (0, 1)")
    return (
        _moricz_profile("moricz_upper", seq, up, xs, moricz_upper_value, threshold),
        _moricz_profile("moricz_lower", seq, lo, xs, moricz_lower_value, threshold),
    )
