"""Segmented prime sieve, von Mangoldt and Mertens sums, densities of integer sets."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .errors import CapacityError, DomainError
from .sequences import compensated_cumsum, fsum_array
from .special_functions import log_integral

__all__ = [
    "SieveTable",
    "build_sieve",
    "mangoldt_weighted_sum",
    "mertens_sum",
    "prime_power_remainder",
    "pnt_hierarchy_report",
    "IntegerSetSpec",
    "parse_set",
    "DensityReport",
    "density_report",
    "leading_digit",
    "SIEVE_LIMIT",
    "SEGMENT",
]

SIEVE_LIMIT = 10**8
SEGMENT = 10**6


def _small_primes(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def _segment_flags(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primality of ``lo <= n < hi`` using base primes up to ``sqrt(hi)``."""
    flags = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        flags[start - lo :: p] = False
    if lo <= 1:
        flags[: 2 - lo] = False
    return flags


@dataclass
class SieveTable:
    """Primes up to ``limit`` plus the prime powers ``p**m`` (``m >= 2``).

    The smallest-prime-factor table is never stored whole; ``spf_segment``
    rebuilds it for any window on demand.
    """

    limit: int
    primes: np.ndarray
    power_values: np.ndarray  # sorted p**m, m >= 2
    power_logs: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def pi(self, x: int) -> int:
        return int(np.searchsorted(self.primes, x, side="right"))

    def _check(self, x):
        if x > self.limit:
            raise DomainError(f"x = {x} exceeds the sieve limit {self.limit}")

    def is_prime_array(self, lo: int, hi: int) -> np.ndarray:
        self._check(hi - 1)
        out = np.zeros(hi - lo, dtype=bool)
        sel = self.primes[(self.primes >= lo) & (self.primes < hi)]
        out[sel - lo] = True
        return out

    def mangoldt_array(self, lo: int, hi: int) -> np.ndarray:
        """Lambda(n) for ``lo <= n < hi``."""
        self._check(hi - 1)
        out = np.zeros(hi - lo)
        i, j = np.searchsorted(self.primes, [lo, hi])
        sel = self.primes[i:j]
        out[sel - lo] = np.log(sel.astype(float))
        i, j = np.searchsorted(self.power_values, [lo, hi])
        out[self.power_values[i:j] - lo] = self.power_logs[i:j]
        return out

    def spf_segment(self, lo: int, hi: int) -> np.ndarray:
        """Smallest prime factor of each ``lo <= n < hi`` (0 for n < 2)."""
        self._check(hi - 1)
        spf = np.zeros(hi - lo, dtype=np.int64)
        for p in self.primes:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, -(-lo // p) * p)
            view = spf[start - lo :: p]
            view[view == 0] = p
        n = np.arange(lo, hi)
        rest = (spf == 0) & (n >= 2)
        spf[rest] = n[rest]
        return spf

    # cumulative tables for the two weighted sums, built lazily
    def _prime_cum(self):
        if "prime" not in self._cache:
            p = self.primes.astype(float)
            self._cache["prime"] = compensated_cumsum(np.log(p) / p)
        return self._cache["prime"]

    def _power_cum(self):
        if "power" not in self._cache:
            v = self.power_values.astype(float)
            self._cache["power"] = compensated_cumsum(self.power_logs / v)
        return self._cache["power"]


def build_sieve(limit: int, threads: int = 1) -> SieveTable:
    """Segmented sieve of Eratosthenes over ``[2, limit]``; ``limit <= 1e8``."""
    limit = int(limit)
    if limit < 2:
        raise DomainError("sieve limit must be at least 2")
    if limit > SIEVE_LIMIT:
        raise CapacityError(f"sieve limit {limit} exceeds the budget {SIEVE_LIMIT}")
    base = _small_primes(math.isqrt(limit) + 1)
    bounds = [(lo, min(lo + SEGMENT, limit + 1)) for lo in range(0, limit + 1, SEGMENT)]

    def work(b):
        lo, hi = b
        return np.flatnonzero(_segment_flags(lo, hi, base)) + lo

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    primes = np.concatenate(parts).astype(np.int64)
    vals, logs = [], []
    for p in base:
        p = int(p)
        q = p * p
        while q <= limit:
            vals.append(q)
            logs.append(math.log(p))
            q *= p
    order = np.argsort(vals, kind="stable")
    return SieveTable(limit, primes, np.asarray(vals, dtype=np.int64)[order],
                      np.asarray(logs, dtype=float)[order])


def _cum_at(values, cum, x):
    k = int(np.searchsorted(values, x, side="right"))
    return 0.0 if k == 0 else float(cum[k - 1])


def mertens_sum(sieve: SieveTable, x: int) -> float:
    """``sum_{p <= x} log p / p``."""
    sieve._check(x)
    return _cum_at(sieve.primes, sieve._prime_cum(), x)


def prime_power_remainder(sieve: SieveTable, x: int) -> float:
    """``sum_{p**m <= x, m >= 2} log p / p**m``; nondecreasing in x."""
    sieve._check(x)
    return _cum_at(sieve.power_values, sieve._power_cum(), x)


def mangoldt_weighted_sum(sieve: SieveTable, x: int) -> float:
    """``sum_{n <= x} Lambda(n)/n``."""
    return math.fsum([mertens_sum(sieve, x), prime_power_remainder(sieve, x)])


def pnt_hierarchy_report(sieve: SieveTable, x_checkpoints) -> list[dict]:
    rows = []
    for x in x_checkpoints:
        x = int(x)
        sieve._check(x)
        pi = sieve.pi(x)
        lx = math.log(x)
        li = log_integral(float(x)) if x > 2 else 0.0
        pn = int(sieve.primes[pi - 1]) if pi else 0
        rows.append({
            "x": x,
            "mangoldt_minus_log": mangoldt_weighted_sum(sieve, x) - lx,
            "mertens_minus_log": mertens_sum(sieve, x) - lx,
            "pi": pi,
            "li": li,
            "pi_over_li": pi / li if li > 0 else math.nan,
            "pi_log_x_over_x": pi * lx / x,
            "pn_over_n_log_n": pn / (pi * math.log(pi)) if pi > 1 else math.nan,
        })
    return rows


# --------------------------------------------------------------- integer sets

_POW10 = 10 ** np.arange(19, dtype=np.int64)


def leading_digit(n) -> np.ndarray:
    """Leading decimal digit via digit counts (no string conversion)."""
    n = np.asarray(n, dtype=np.int64)
    digits = np.searchsorted(_POW10, n, side="right")  # number of digits
    return n // _POW10[np.maximum(digits - 1, 0)]


@dataclass(frozen=True)
class IntegerSetSpec:
    kind: str  # residue_class | primes | primes_in_ap | leading_digit | explicit_list
    params: tuple = ()

    @property
    def needs_sieve(self) -> bool:
        return self.kind in ("primes", "primes_in_ap")

    @property
    def name(self) -> str:
        if self.kind == "explicit_list":
            return f"explicit_list[{len(self.params)}]"
        return self.kind + (":" + ",".join(str(p) for p in self.params) if self.params else "")

    def mask(self, lo: int, hi: int, sieve: SieveTable | None = None) -> np.ndarray:
        """Membership of ``lo <= n < hi`` (n >= 1)."""
        n = np.arange(lo, hi, dtype=np.int64)
        if self.kind == "residue_class":
            a, b = self.params
            return n % b == a % b
        if self.kind == "leading_digit":
            return leading_digit(n) == self.params[0]
        if self.kind == "explicit_list":
            vals = np.asarray(self.params, dtype=np.int64)
            return np.isin(n, vals)
        if sieve is None:
            raise DomainError(f"set {self.name} needs a sieve")
        pr = sieve.is_prime_array(lo, hi)
        if self.kind == "primes":
            return pr
        a, b = self.params
        return pr & (n % b == a % b)

    def contains(self, n: int, sieve: SieveTable | None = None) -> bool:
        return bool(self.mask(n, n + 1, sieve)[0])


def parse_set(text: str) -> IntegerSetSpec:
    """``even``, ``ap:a,b``, ``primes``, ``pap:a,b``, ``ld:d``, ``file:<path>``."""
    name, _, arg = text.partition(":")
    if name == "even":
        return IntegerSetSpec("residue_class", (0, 2))
    if name == "ap":
        a, b = (int(v) for v in arg.split(","))
        if b < 1:
            raise DomainError("modulus must be positive")
        return IntegerSetSpec("residue_class", (a % b, b))
    if name == "primes":
        return IntegerSetSpec("primes")
    if name == "pap":
        a, b = (int(v) for v in arg.split(","))
        if b < 1:
            raise DomainError("modulus must be positive")
        return IntegerSetSpec("primes_in_ap", (a % b, b))
    if name == "ld":
        d = int(arg)
        if not 1 <= d <= 9:
            raise DomainError("leading digit must be 1..9")
        return IntegerSetSpec("leading_digit", (d,))
    if name == "file":
        text_vals = Path(arg).read_text().split()
        vals = sorted({int(v) for v in text_vals if not v.startswith("#")})
        if vals and vals[0] < 1:
            raise DomainError("explicit sets contain positive integers")
        return IntegerSetSpec("explicit_list", tuple(vals))
    raise KeyError(f"unknown set {text!r}")


@dataclass
class DensityReport:
    """Density estimates of one set.

    Per checkpoint ``n``: ``arithmetic`` is ``|A cap [1,n]|/n`` and
    ``logarithmic`` the ``1/log n``-normalised sum of ``1/k``;
    ``logarithmic_h`` normalises by ``H_n`` instead. The ``*_lower/_upper``
    envelopes are min/max over ``k <= n``: the ``H_n`` estimator at ``k`` is a
    convex combination of ``a(1..k)``, so the chain holds exactly.
    ``analytic`` is ``(sigma-1) sum_{A, n<=cap} n**-sigma`` with tail bound
    ``cap**(1-sigma)``; ``analytic_exact`` closes it via Hurwitz zeta for
    residue classes; ``zeta_normalised`` divides the sum by ``zeta(sigma)``;
    ``prime_relative`` is the share of ``sum_p p**-sigma`` (prime subsets).
    """

    set_name: str
    checkpoints: np.ndarray
    arithmetic: np.ndarray
    logarithmic: np.ndarray
    logarithmic_h: np.ndarray
    arithmetic_lower: np.ndarray
    arithmetic_upper: np.ndarray
    logarithmic_lower: np.ndarray
    logarithmic_upper: np.ndarray
    sigma: np.ndarray
    cap: int
    analytic: np.ndarray
    analytic_tail_bound: np.ndarray
    analytic_exact: np.ndarray
    zeta_normalised: np.ndarray
    prime_relative: np.ndarray
    verdicts: dict

    def chain_holds(self, tol: float = 1e-12) -> bool:
        return bool(np.all(self.arithmetic_lower <= self.logarithmic_lower + tol)
                    and np.all(self.logarithmic_lower <= self.logarithmic_upper + tol)
                    and np.all(self.logarithmic_upper <= self.arithmetic_upper + tol))

    def rows(self):
        out = []
        for j, n in enumerate(self.checkpoints.tolist()):
            out.append({"set": self.set_name, "kind": "checkpoint", "n": n, "sigma": "",
                        "arithmetic": float(self.arithmetic[j]),
                        "logarithmic": float(self.logarithmic[j]),
                        "logarithmic_h": float(self.logarithmic_h[j]),
                        "arithmetic_lower": float(self.arithmetic_lower[j]),
                        "arithmetic_upper": float(self.arithmetic_upper[j]),
                        "logarithmic_lower": float(self.logarithmic_lower[j]),
                        "logarithmic_upper": float(self.logarithmic_upper[j])})
        for j, s in enumerate(self.sigma.tolist()):
            out.append({"set": self.set_name, "kind": "analytic", "n": self.cap, "sigma": s,
                        "analytic": float(self.analytic[j]),
                        "analytic_tail_bound": float(self.analytic_tail_bound[j]),
                        "analytic_exact": float(self.analytic_exact[j]),
                        "zeta_normalised": float(self.zeta_normalised[j]),
                        "prime_relative": float(self.prime_relative[j])})
        return out


def _spread_verdict(values, tol=0.02):
    tail = values[len(values) // 2:]
    if tail.size < 2:
        return "inconclusive"
    return "stable" if float(np.ptp(tail)) <= tol else "oscillating"


def density_report(spec: IntegerSetSpec, n_checkpoints, sigma_grid=(1.2, 1.1, 1.05),
                   sieve: SieveTable | None = None, cap: int | None = None) -> DensityReport:
    cps = np.asarray(sorted({int(n) for n in n_checkpoints}), dtype=np.int64)
    if cps.size == 0 or cps[0] < 2:
        raise DomainError("checkpoints must be >= 2")
    sig = np.asarray(sigma_grid, dtype=float)
    if np.any(sig <= 1.0):
        raise DomainError("sigma must exceed 1")
    N = int(cps[-1])
    cap = int(cap if cap is not None else N)
    if spec.needs_sieve:
        if sieve is None:
            sieve = build_sieve(max(N, cap))
        sieve._check(max(N, cap))

    m = spec.mask(1, N + 1, sieve)
    k = np.arange(1, N + 1, dtype=float)
    count = np.cumsum(m)
    a = count / k
    recip = compensated_cumsum(np.where(m, 1.0 / k, 0.0))
    harm = compensated_cumsum(1.0 / k)
    log_h = recip / harm
    idx = cps - 1
    with np.errstate(divide="ignore"):
        logarithmic = recip[idx] / np.log(cps.astype(float))
    a_lo = np.minimum.accumulate(a)[idx]
    a_hi = np.maximum.accumulate(a)[idx]
    l_lo = np.minimum.accumulate(log_h)[idx]
    l_hi = np.maximum.accumulate(log_h)[idx]

    analytic = np.empty(sig.size)
    zeta_norm = np.empty(sig.size)
    exact = np.full(sig.size, np.nan)
    rel = np.full(sig.size, np.nan)
    for j, s in enumerate(sig):
        parts, prime_parts = [], []
        for lo in range(1, cap + 1, SEGMENT):
            hi = min(lo + SEGMENT, cap + 1)
            n = np.arange(lo, hi, dtype=float)
            w = n ** -s
            parts.append(fsum_array(w[spec.mask(lo, hi, sieve)]))
            if spec.needs_sieve:
                prime_parts.append(fsum_array(w[sieve.is_prime_array(lo, hi)]))
        total = math.fsum(parts)
        analytic[j] = (s - 1.0) * total
        zeta_norm[j] = total / float(special.zeta(s))
        if spec.needs_sieve:
            rel[j] = total / math.fsum(prime_parts)
        if spec.kind == "residue_class":
            r, b = spec.params
            first = r if r > 0 else b
            exact[j] = (s - 1.0) * b ** -s * float(special.zeta(s, first / b))
    verdicts = {
        "arithmetic": _spread_verdict(a[idx]),
        "logarithmic": _spread_verdict(logarithmic),
        "chain": "holds" if bool(np.all(a_lo <= l_lo + 1e-12) and np.all(l_hi <= a_hi + 1e-12))
        else "violated",
    }
    return DensityReport(spec.name, cps, a[idx], logarithmic, log_h[idx], a_lo, a_hi, l_lo, l_hi,
                         sig, cap, analytic, cap ** (1.0 - sig), exact, zeta_norm, rel, verdicts)
