"""Monte Carlo and analytic checks of the logarithmic strong law.

Laws with and without the ``L / log L`` moment, exact truncated means
``m_k``, trajectory statistics for the equivalent statements (ii)-(ix),
and analytic exceedance series.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .laws import LawSpec
from .special_functions import phi, phi_inv

__all__ = [
    "LawSpec",
    "SeriesCheck",
    "moment_check",
    "truncated_mean",
    "exceedance_series",
    "SimReport",
    "simulate_statement",
    "replica_seed",
    "STATEMENTS",
]

STATEMENTS = ("ii", "iii", "iv", "vi", "vii", "viii", "ix")
CONVERGENT_EXPONENT = 1.75
DIVERGENT_EXPONENT = 1.25


@dataclass
class SeriesCheck:
    """Partial sums of a positive series at checkpoints ``10**j``.

    ``exponents`` are local decay exponents ``p`` of the per-decade
    increments ``I_j ~ j**-p``: ``sum 1/(n log^q n)`` has ``p = q``, so the
    series converges iff ``p > 1``; geometric decay shows up as large p.
    """

    name: str
    checkpoints: np.ndarray
    partial_sums: np.ndarray
    increments: np.ndarray
    exponents: np.ndarray
    verdict: str


def _verdict(checkpoints, partial):
    inc = np.diff(np.concatenate([[0.0], partial]))
    j = np.log10(checkpoints.astype(float))
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = -np.diff(np.log(inc)) / np.diff(np.log(j))
    scale = max(abs(partial[-1]), 1e-300)
    if np.all(inc[-2:] <= 1e-14 * scale):
        return inc, expo, "convergent"
    last = expo[-2:]
    if np.all(np.isfinite(last)) and np.all(last >= CONVERGENT_EXPONENT):
        return inc, expo, "convergent"
    if np.all(inc[-3:] > 0) and np.all(last <= DIVERGENT_EXPONENT):
        return inc, expo, "divergent"
    if inc[-1] > 0 and inc[-1] >= inc[-2]:
        return inc, expo, "divergent"
    return inc, expo, "inconclusive"


def _decades(horizon):
    top = int(math.floor(math.log10(horizon) + 1e-12))
    if top < 4:
        raise DomainError("horizon must be at least 1e4")
    return np.array([10**j for j in range(1, top + 1)], dtype=np.int64)


def moment_check(law: LawSpec, horizon: int = 10**9) -> dict:
    """Partial sums of ``E[|X|/(1 + log+|X|)]`` and ``E|X|`` with verdicts.

    Returns ``{"LlogL": SeriesCheck, "mean": SeriesCheck}`` for the uncapped
    law, summed over ``|X| <= 10**j`` with ``10**j <= horizon <= 1e9``.
    """
    if horizon > 10**9:
        raise DomainError("horizon is limited to 1e9")
    cps = _decades(horizon)
    out = {}
    funcs = {
        "LlogL": lambda x: x / (1.0 + np.log(np.maximum(x, 1.0))),
        "mean": lambda x: x,
    }
    for name, g in funcs.items():
        partial = np.array([law.abs_expectation(g, int(c)) for c in cps])
        inc, expo, verdict = _verdict(cps, partial)
        out[name] = SeriesCheck(name, cps, partial, inc, expo, verdict)
    return out


def truncated_mean(law: LawSpec, k):
    """``m_k = E[X 1{|X| <= phi(k+1)}]``, exact partial pmf sums."""
    return law.truncated_mean(k)


def exceedance_series(law: LawSpec, epsilon: float, horizon: int = 10**7) -> SeriesCheck:
    """Partial sums of ``sum_{n <= N} P(|X| > eps n log n)`` at ``N = 10**j``."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    cps = _decades(horizon)
    parts = []
    chunk = 1 << 20
    acc = 0.0
    marks = []
    top = int(cps[-1])
    ci = 0
    for a in range(1, top + 1, chunk):
        b = min(a + chunk, top + 1)
        n = np.arange(a, b, dtype=float)
        terms = law.tail_abs(epsilon * n * np.log(n))
        while ci < len(cps) and cps[ci] < b:
            cut = int(cps[ci]) - a + 1
            marks.append(math.fsum(parts + [acc, math.fsum(terms[:cut].tolist())]))
            ci += 1
        acc = math.fsum([acc, math.fsum(terms.tolist())])
    partial = np.array(marks)
    inc, expo, verdict = _verdict(cps, partial)
    return SeriesCheck("exceedance", cps, partial, inc, expo, verdict)


def replica_seed(master_seed: int, replica: int) -> np.random.SeedSequence:
    """Seed for one replica: the replica index is a spawn key of the master."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replica),))


@dataclass
class SimReport:
    """Per-replica trajectories of one statement's statistic."""

    statement: str
    law: str
    horizons: np.ndarray
    trajectories: np.ndarray  # replicas x horizons
    seeds: list
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def median(self) -> np.ndarray:
        return np.median(np.abs(self.trajectories), axis=0)

    @property
    def q90(self) -> np.ndarray:
        return np.quantile(np.abs(self.trajectories), 0.9, axis=0)

    def to_dict(self) -> dict:
        return {
            "statement": self.statement,
            "law": self.law,
            "params": self.params,
            "horizons": self.horizons.tolist(),
            "seeds": self.seeds,
            "summary": {"median": self.median.tolist(), "q90": self.q90.tolist()},
            "trajectories": self.trajectories.tolist(),
            "extra": {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.extra.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["statement", "law", "n", "quantile", "value"])
        for j, n in enumerate(self.horizons.tolist()):
            w.writerow([self.statement, self.law, n, "0.5", repr(float(self.median[j]))])
            w.writerow([self.statement, self.law, n, "0.9", repr(float(self.q90[j]))])
        return buf.getvalue()


def _n_log_n(k):
    return k * np.log(k)


def _one_replica(statement, law, horizons, seed, params):
    rng = np.random.default_rng(seed)
    N = int(horizons[-1])
    if statement == "iv":
        x_last = 1.0 - 1.0 / N
        # weights x^(i+1)/(i+1) past K are below 1e-8 of the normaliser
        K = int(N * (math.log(N) + 8 * math.log(10))) + 1
        N_draw = max(N, K)
    else:
        N_draw = N
    idx = np.arange(1, N_draw + 1, dtype=float)
    X = law.sample(rng, N_draw)
    if statement in ("viii", "ix"):
        return _baum_katz(statement, law, X, horizons, params)
    m = law.truncated_mean(np.arange(1, N_draw + 1))
    Y = X - m
    out = np.empty(len(horizons))
    if statement == "ii":
        r = np.abs(X[1:]) / _n_log_n(idx[1:])  # k >= 2
        for j, n in enumerate(horizons):
            lo = n // 2 + 1
            out[j] = r[max(lo, 2) - 2: n - 1].max()
    elif statement == "iii":
        c = np.cumsum(Y / (idx + 1.0))
        for j, n in enumerate(horizons):
            out[j] = c[n - 1] / math.log(n + 1.0)
    elif statement == "iv":
        for j, n in enumerate(horizons):
            x = 1.0 - 1.0 / n
            K = min(N_draw, int(n * (math.log(n) + 8 * math.log(10))) + 1)
            i = idx[:K]
            w = np.exp((i + 1.0) * math.log(x)) / (i + 1.0)
            # s_0 = 0: there is no X_0
            out[j] = math.fsum((Y[:K] * w).tolist()) / -math.log1p(-x)
    elif statement == "vi":
        c = np.cumsum(Y)
        for j, n in enumerate(horizons):
            out[j] = c[n - 1] / phi(float(n))
    elif statement == "vii":
        beta = params["beta"]
        c = np.concatenate([[0.0], np.cumsum(Y)])
        for j, n in enumerate(horizons):
            lower = phi_inv(phi(float(n)) / beta)
            first = int(math.floor(lower))  # sum over first < i <= n
            out[j] = (c[n] - c[first]) / phi(float(n))
    return out


def _baum_katz(statement, law, X, horizons, params):
    gamma, eps = params["gamma"], params["epsilon"]
    out = np.empty(len(horizons))
    for j, n in enumerate(horizons):
        shift = n / (gamma - 1.0)
        i = np.arange(1, n + 1, dtype=float)
        centre = law.truncated_mean(np.floor(i + shift).astype(np.int64))
        dev = np.cumsum(X[:n] - centre)
        stat = np.abs(dev).max() if statement == "ix" else abs(dev[-1])
        out[j] = float(stat > phi(shift) * eps)
    return out


def simulate_statement(statement: str, law: LawSpec, horizons, replicas: int = 50,
                       master_seed: int = 0, params: dict | None = None,
                       threads: int = 1) -> SimReport:
    """Simulate one statement's statistic along ``horizons``.

    Statistics per horizon ``n``: ii ``max_{n/2<k<=n} |X_k|/(k log k)``;
    iii ell-mean (``log(n+1)`` convention) of ``X_i - m_i``; iv L-mean at
    ``x = 1 - 1/n``; vi ``phi(n)^-1 sum_{i<=n} (X_i - m_i)``; vii the same
    over ``phi_inv(phi(n)/beta) < i <= n``; viii / ix exceedance indicators
    of ``|sum_{i<=n} (X_i - m_{floor(i + n/(gamma-1))})|`` (ix: running max)
    over ``epsilon phi(n/(gamma-1))``. For viii / ix ``extra`` carries the
    replica frequencies and the ``1/n``-weighted partial series.
    """
    if statement not in STATEMENTS:
        raise DomainError(f"unknown statement {statement!r}")
    if replicas < 1:
        raise DomainError("replicas must be >= 1")
    params = dict(params or {})
    params.setdefault("beta", 2.0)
    params.setdefault("gamma", 2.0)
    params.setdefault("epsilon", 1.0)
    if params["beta"] <= 1 or params["gamma"] <= 1:
        raise DomainError("beta and gamma must exceed 1")
    if params["epsilon"] <= 0:
        raise DomainError("epsilon must be positive")
    hs = np.asarray(sorted(int(h) for h in horizons), dtype=np.int64)
    if hs[0] < 3:
        raise DomainError("horizons must be >= 3")
    used = {k: params[k] for k in (("beta",) if statement == "vii" else
                                  ("gamma", "epsilon") if statement in ("viii", "ix") else ())}
    seeds = [replica_seed(master_seed, r) for r in range(replicas)]
    run = lambda s: _one_replica(statement, law, hs, s, params)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, seeds))
    else:
        rows = [run(s) for s in seeds]
    traj = np.vstack(rows)
    extra = {}
    if statement in ("viii", "ix"):
        prob = traj.mean(axis=0)
        prev = np.concatenate([[0], hs[:-1]])
        # sum of 1/n over each block (prev, n]
        from scipy.special import digamma
        w = digamma(hs + 1.0) - digamma(prev + 1.0)
        extra = {"probability": prob, "partial_series": np.cumsum(w * prob)}
    seed_info = [[int(master_seed), r] for r in range(replicas)]
    return SimReport(statement, law.name, hs, traj, seed_info, used, extra)
