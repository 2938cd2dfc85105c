"""Probability laws on the integers used by the P-method and the LLN lab.

Zipf-type families ``pmf(n) ∝ n**-2 (log n)**-p`` (``n >= 2``, ``p`` in
{0, 1, 2}) keep an exact table up to ``DENSE`` and are completed beyond it by
Euler-Maclaurin summation against closed-form integrals, so normalisers,
tails and partial moments are accurate to rounding. Sampling uses the
inverse CDF; mass beyond ``cap`` is assigned to ``cap``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .errors import DomainError
from .special_functions import phi

__all__ = ["LawSpec", "two_point", "point_mass", "poisson_like", "zipf", "parse_law", "LAW_NAMES"]

DENSE = 1 << 20
DEFAULT_CAP = 10**8

_ZIPF_POWER = {"zipf_plain": 0, "zipf_log1": 1, "zipf_log2": 2}


class _ZipfTable:
    """Exact tables for ``f(n) = n**-2 (log n)**-p`` on ``2 <= n <= DENSE``."""

    def __init__(self, p: int):
        self.p = p
        n = np.arange(2, DENSE + 1, dtype=float)
        f = self.f(n)
        self.raw_tail_dense = self._em(self.f, self.fprime, self.int_f, DENSE + 1, math.inf)
        self.Z = math.fsum(f.tolist()) + self.raw_tail_dense
        self.pmf = f / self.Z
        # cdf[j] = P(X <= j + 2); tail[j] = P(X >= j + 2)
        self.cdf = np.cumsum(self.pmf)
        rev = np.cumsum(self.pmf[::-1])[::-1]
        self.tail = rev + self.raw_tail_dense / self.Z
        self.moment = np.cumsum(n * self.pmf)

    # f and its integrals
    def f(self, x):
        return x ** -2.0 * np.log(x) ** -float(self.p)

    def fprime(self, x):
        lx = np.log(x)
        return -(x ** -3.0) * lx ** -float(self.p) * (2.0 + self.p / lx)

    def xf(self, x):
        return x ** -1.0 * np.log(x) ** -float(self.p)

    def xfprime(self, x):
        lx = np.log(x)
        return -(x ** -2.0) * lx ** -float(self.p) * (1.0 + self.p / lx)

    def int_f(self, a, b):
        """``int_a^b f``; ``b`` may be inf."""
        def F(x):  # antiderivative up to sign convention: int_x^inf f
            if np.isscalar(x) and math.isinf(x):
                return 0.0
            lx = np.log(x)
            if self.p == 0:
                return 1.0 / x
            if self.p == 1:
                return special.exp1(lx)
            return 1.0 / (x * lx) - special.exp1(lx)
        return F(a) - F(b)

    def int_xf(self, a, b):
        la, lb = np.log(a), np.log(b)
        if self.p == 0:
            return lb - la
        if self.p == 1:
            return np.log(lb) - np.log(la)
        return 1.0 / la - 1.0 / lb

    @staticmethod
    def _em(g, gp, integral, a, b):
        """Euler-Maclaurin ``sum_{k=a}^{b} g(k)`` for smooth decreasing g."""
        if np.isscalar(b) and math.isinf(b):
            return integral(a, b) + g(a) / 2.0 - gp(a) / 12.0
        return integral(a, b) + (g(a) + g(b)) / 2.0 + (gp(b) - gp(a)) / 12.0

    def tail_from(self, k):
        """``P(X >= k)`` for integer arrays ``k``."""
        k = np.asarray(k, dtype=np.int64)
        out = np.ones(k.shape)
        dense = (k >= 2) & (k <= DENSE)
        out[dense] = self.tail[k[dense] - 2]
        far = k > DENSE
        if far.any():
            kf = k[far].astype(float)
            out[far] = self._em(self.f, self.fprime, self.int_f, kf, math.inf) / self.Z
        return out

    def cum_moment(self, N):
        """``sum_{2 <= n <= N} n pmf(n)`` for integer arrays ``N``."""
        N = np.asarray(N, dtype=np.int64)
        out = np.zeros(N.shape)
        dense = (N >= 2) & (N <= DENSE)
        out[dense] = self.moment[N[dense] - 2]
        far = N > DENSE
        if far.any():
            a = float(DENSE + 1)
            b = N[far].astype(float)
            extra = self._em(self.xf, self.xfprime, self.int_xf, a, b) / self.Z
            out[far] = self.moment[-1] + extra
        return out

    def expect(self, g, N):
        """``sum_{2 <= n <= N} g(n) pmf(n)`` for a smooth vectorised g."""
        top = min(int(N), DENSE)
        n = np.arange(2, top + 1, dtype=float)
        total = math.fsum((g(n) * self.pmf[: top - 1]).tolist())
        if N > DENSE:
            h = lambda x: g(x) * self.f(x)

            def hp(x):
                d = 1e-5 * x
                return (h(x + d) - h(x - d)) / (2 * d)

            def integral(a, b):
                val, _ = integrate.quad(lambda v: h(math.exp(v)) * math.exp(v),
                                        math.log(a), math.log(b), epsrel=1e-12, limit=200)
                return val
            total += self._em(h, hp, integral, float(DENSE + 1), float(N)) / self.Z
        return total

    def sample(self, u, cap):
        """Inverse CDF for uniforms ``u``."""
        out = np.searchsorted(self.cdf, u, side="left").astype(np.int64) + 2
        far = out > DENSE
        if far.any():
            q = 1.0 - u[far]  # need smallest k with P(X > k) < q
            lo = np.full(q.shape, DENSE, dtype=np.int64)
            hi = np.full(q.shape, cap, dtype=np.int64)
            beyond = self.tail_from(hi + 1) >= q
            for _ in range(64):
                mid = (lo + hi) // 2
                ok = self.tail_from(mid + 1) < q
                hi = np.where(ok, mid, hi)
                lo = np.where(ok, lo, mid)
                if np.all(hi - lo <= 1):
                    break
            res = hi
            res[beyond] = cap
            out[far] = res
        return np.minimum(out, cap)


_TABLES: dict[int, _ZipfTable] = {}


def _table(p: int) -> _ZipfTable:
    if p not in _TABLES:
        _TABLES[p] = _ZipfTable(p)
    return _TABLES[p]


def _poisson_top(mu: float, tol: float) -> int:
    """Smallest K found by doubling with ``P(X > K) <= tol``.

    ``poisson.isf`` returns nan for tolerances below ~1e-16, so search instead.
    """
    top = int(mu + 10.0 * math.sqrt(mu) + 40)
    while stats.poisson.sf(top, mu) > tol and top < 10**7:
        top *= 2
    return top


@dataclass(frozen=True)
class LawSpec:
    """A law on the integers.

    ``family`` is one of ``point_mass``, ``two_point``, ``poisson_like``,
    ``zipf_plain``, ``zipf_log1``, ``zipf_log2``. ``signed`` multiplies by an
    independent fair sign. ``has_mean`` / ``has_LlogL`` describe the
    uncapped family (``E|X| < inf`` and ``E[|X| / (1 + log+ |X|)] < inf``).
    The analytic functions describe the capped law actually sampled.
    """

    family: str
    params: tuple = ()
    signed: bool = False
    cap: int = DEFAULT_CAP
    has_mean: bool = field(init=False)
    has_LlogL: bool = field(init=False)

    def __post_init__(self):
        fam = self.family
        if fam not in ("point_mass", "two_point", "poisson_like", *_ZIPF_POWER):
            raise KeyError(f"unknown law family {fam!r}")
        if fam in _ZIPF_POWER:
            p = _ZIPF_POWER[fam]
            flags = (p >= 2, p >= 1)
        else:
            flags = (True, True)
        object.__setattr__(self, "has_mean", flags[0])
        object.__setattr__(self, "has_LlogL", flags[1])

    @property
    def name(self) -> str:
        base = self.family + (":" + ",".join(map(str, self.params)) if self.params else "")
        return base + (":signed" if self.signed else "")

    @property
    def _zipf(self) -> _ZipfTable | None:
        p = _ZIPF_POWER.get(self.family)
        return None if p is None else _table(p)

    # --- finite-support description of the base (unsigned) law -----------
    def _finite_atoms(self, tol: float = 1e-17):
        fam, pr = self.family, self.params
        if fam == "point_mass":
            return np.array([pr[0]], dtype=float), np.array([1.0])
        if fam == "two_point":
            a, b, p = pr
            return np.array([a, b], dtype=float), np.array([p, 1.0 - p])
        if fam == "poisson_like":
            mu = pr[0]
            k = np.arange(0, _poisson_top(mu, tol) + 1)
            return k.astype(float), stats.poisson.pmf(k, mu)
        return None

    def _atoms(self):
        """(values, probs) of the full law when it has finite support."""
        fin = self._finite_atoms()
        if fin is None:
            return None
        v, p = fin
        v = np.minimum(v, self.cap)
        if self.signed:
            v = np.concatenate([v, -v])
            p = np.concatenate([p, p]) / 2.0
        return v, p

    # --- analytic quantities ---------------------------------------------
    def mean(self) -> float:
        """Mean of the capped law."""
        if self.signed:
            return 0.0
        at = self._atoms()
        if at is not None:
            return math.fsum((at[0] * at[1]).tolist())
        z = self._zipf
        return float(z.cum_moment(self.cap - 1)) + self.cap * float(z.tail_from(self.cap))

    def truncated_mean(self, k):
        """``m_k = E[X 1{|X| <= phi(k + 1)}]`` (array or scalar ``k``)."""
        karr = np.asarray(k)
        if karr.size and karr.min() < 0:
            raise DomainError("k must be >= 0")
        cut = np.floor(phi(np.asarray(karr, dtype=float) + 1.0)).astype(np.int64)
        if self.signed:
            out = np.zeros(cut.shape)
        else:
            at = self._atoms()
            if at is not None:
                v, p = at
                inside = np.abs(v)[None, :] <= np.atleast_1d(cut)[:, None]
                out = (inside * (v * p)[None, :]).sum(axis=1).reshape(cut.shape)
            else:
                z = self._zipf
                below = np.minimum(cut, self.cap - 1)
                out = z.cum_moment(below)
                out = out + np.where(cut >= self.cap, self.cap * z.tail_from(self.cap), 0.0)
        return float(out) if np.ndim(k) == 0 else out

    def tail_abs(self, t):
        """``P(|X| > t)`` for the uncapped family."""
        t = np.asarray(t, dtype=float)
        k = np.floor(t).astype(np.int64) + 1  # P(|X| >= k)
        at = self._finite_atoms()
        if at is not None:
            v, p = at
            av = np.abs(v)
            out = ((av[None, :] > np.atleast_1d(t).ravel()[:, None]) * p[None, :]).sum(axis=1)
            return out.reshape(t.shape)
        return self._zipf.tail_from(np.maximum(k, 2))

    def abs_expectation(self, g, N: int) -> float:
        """``E[g(|X|); |X| <= N]`` for the uncapped family."""
        at = self._finite_atoms()
        if at is not None:
            v, p = at
            av = np.abs(v)
            m = av <= N
            return math.fsum((g(av[m]) * p[m]).tolist())
        return self._zipf.expect(g, N)

    def pmf_nonneg(self, tol: float):
        """pmf on ``0..K`` where the tail beyond K is below ``tol``."""
        if self.signed:
            raise DomainError("the P-method needs a law on the non-negative integers")
        fam, pr = self.family, self.params
        if fam == "point_mass" or fam == "two_point":
            v, p = self._atoms()
            if np.any(v < 0) or np.any(v != np.round(v)):
                raise DomainError("the P-method needs a law on the non-negative integers")
            out = np.zeros(int(v.max()) + 1)
            np.add.at(out, v.astype(int), p)
            return out
        if fam == "poisson_like":
            return stats.poisson.pmf(np.arange(_poisson_top(pr[0], tol) + 1), pr[0])
        raise DomainError("the P-method needs a law with finite variance")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        fam, pr = self.family, self.params
        if fam == "point_mass":
            x = np.full(size, pr[0], dtype=float)
        elif fam == "two_point":
            a, b, p = pr
            x = np.where(rng.random(size) < p, float(a), float(b))
        elif fam == "poisson_like":
            x = rng.poisson(pr[0], size).astype(float)
        else:
            x = self._zipf.sample(rng.random(size), self.cap).astype(float)
        x = np.minimum(x, self.cap)
        if self.signed:
            x = x * (1.0 - 2.0 * rng.integers(0, 2, size))
        return x

    def cap_bias(self) -> float:
        """Probability mass moved onto ``cap`` by the sampler."""
        return float(self.tail_abs(self.cap))


def point_mass(c: float = 0.0, signed: bool = False) -> LawSpec:
    return LawSpec("point_mass", (float(c),), signed=signed)


def two_point(a: float, b: float, p: float = 0.5, signed: bool = False) -> LawSpec:
    """``P(X = a) = p``, ``P(X = b) = 1 - p``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    return LawSpec("two_point", (float(a), float(b), float(p)), signed=signed)


def poisson_like(mu: float = 1.0) -> LawSpec:
    if mu <= 0:
        raise DomainError("the Poisson mean must be positive")
    return LawSpec("poisson_like", (float(mu),))


def zipf(kind: str, signed: bool = False, cap: int = DEFAULT_CAP) -> LawSpec:
    """``zipf_plain``, ``zipf_log1`` or ``zipf_log2``."""
    return LawSpec(kind, (), signed=signed, cap=int(cap))


LAW_NAMES = ("zero", "pm1", "const", "two_point", "poisson",
             "zipf_plain", "zipf_log1", "zipf_log2")


def parse_law(text: str) -> LawSpec:
    """Parse ``name[:params][:signed]``.

    ``zero``, ``pm1`` (fair +-1), ``const:c``, ``two_point:a,b,p``,
    ``poisson:mu``, ``zipf_plain``, ``zipf_log1``, ``zipf_log2``; a trailing
    ``:signed`` attaches an independent fair sign.
    """
    parts = text.split(":")
    signed = parts[-1] == "signed"
    if signed:
        parts = parts[:-1]
    name = parts[0]
    params = [float(v) for v in parts[1].split(",")] if len(parts) > 1 and parts[1] else []
    if name == "zero":
        return point_mass(0.0, signed)
    if name == "pm1":
        return two_point(-1.0, 1.0, 0.5, signed)
    if name == "const":
        return point_mass(*params, signed=signed)
    if name == "two_point":
        return two_point(*params, signed=signed)
    if name == "poisson":
        if signed:
            return LawSpec("poisson_like", tuple(params) or (1.0,), signed=True)
        return poisson_like(*params)
    if name in _ZIPF_POWER:
        return zipf(name, signed=signed)
    raise KeyError(f"unknown law {name!r}")
