"""Reduced-scale invariant suite behind ``logsumm selftest``."""
from __future__ import annotations

import math
import time

import numpy as np

from . import asclt_lab, laws, lln_lab, number_theory as nt, sequences as sq, tauberian as tb, transforms as tr
from .special_functions import lambert_w, phi, phi_inv


def _w_grid():
    z = np.logspace(-8, 8, 10**4)
    w = lambert_w(z)
    res = np.abs(w * np.exp(w) - z) / np.maximum(1.0, z)
    rng = np.random.default_rng(11)
    a, b = rng.uniform(0, 1e6, (2, 10**4))
    sub = lambert_w(a + b) - lambert_w(a) - lambert_w(b)
    return res.max() <= 1e-12 and sub.max() <= 1e-10, f"max residual {res.max():.2e}"


def _phi_roundtrip():
    x = np.concatenate([[0.0], np.logspace(-6, 6, 2001)])
    e1 = np.abs(phi_inv(phi(x)) - x) / np.maximum(x, 1e-300)
    e1[0] = abs(phi_inv(phi(0.0)))
    e2 = np.abs(phi(phi_inv(x[1:])) - x[1:]) / x[1:]
    err = max(e1.max(), e2.max())
    return err <= 1e-10, f"max relative error {err:.2e}"


def _constant_exactness():
    c = sq.constant(1.0)
    vals = [tr.L_transform(c, 0.999), tr.abel_transform(c, 0.999), tr.borel_transform(c, 50.0),
            tr.p_method_transform(c, laws.poisson_like(1.0), 40)]
    err = max(abs(v - 1.0) for v in vals)
    return err <= 1e-9, f"max error {err:.2e}"


def _identities():
    rng = np.random.default_rng(5)
    worst_dn = worst_chain = 0.0
    for _ in range(5):
        s = sq.explicit(rng.normal(size=5001))
        for lam in (1.5, 2.0, 3.0):
            worst_dn = max(worst_dn, tr.dn_identity_check(s, 5000, lam))
            gap = abs(tr.ell_from_movavg_chain(s, 5000, lam) - tr.ell_transform(s, 5000))
            worst_chain = max(worst_chain, gap)
    return worst_dn <= 1e-10 and worst_chain <= 1e-9, f"dn {worst_dn:.1e}, chain {worst_chain:.1e}"


def _regularity():
    ok = True
    for n in (10, 1000, 10**5, 10**8):
        for lam in (1.5, 2.0, 3.0):
            m = tr.boundary_index(n, lam)
            ok &= m <= n ** (1 / lam) * (1 + 1e-12) < m + 1 + 1e-9
    val = tr.regularity_row_sum(10**8, 2.0)
    return ok and abs(val - 0.5) <= 0.03, f"row sum at 1e8, lambda 2: {val!r}"


def _borel_pmethod():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(3):
        s = sq.explicit(rng.normal(size=400))
        for n in (10, 60):
            gap = abs(tr.borel_transform(s, float(n)) - tr.p_method_transform(s, laws.poisson_like(1.0), n))
            worst = max(worst, gap)
    return worst <= 1e-9, f"max gap {worst:.1e}"


def _tauber_verdicts():
    ns = [10**3, 10**4, 10**5]
    lams = [1.05, 1.2, 1.5, 2.0]
    a = tb.one_sided_condition(sq.constant(1.0), lams, ns).verdict
    b = tb.one_sided_condition(sq.linear(-1.0, -1.0), lams, ns).verdict
    return a == "satisfied" and b == "violated", f"constant {a}, -(i+1) {b}"


def _moricz_quadrature():
    rng = np.random.default_rng(8)
    s = sq.explicit(rng.normal(size=2000))
    worst = 0.0
    for lam, x in ((1.5, 37.3), (0.6, 1500.5)):
        lo, hi = sorted((x, x ** lam))
        # composite midpoint rule in log u, one panel per unit interval
        edges = np.unique(np.concatenate([[lo], np.arange(math.floor(lo) + 1, math.ceil(hi)), [hi]]))
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            h = math.log(b / a) / 50
            u = np.exp(math.log(a) + (np.arange(50) + 0.5) * h)
            total += h * float(np.sum(s.values(np.floor(u).astype(np.int64))))
        sx = s.values(int(math.floor(x)))
        if lam > 1:
            ref = (total - sx * (lam - 1) * math.log(x)) / ((lam - 1) * math.log(x))
            got = tb.moricz_upper_value(s, lam, x)
        else:
            ref = (sx * (1 - lam) * math.log(x) - total) / ((1 - lam) * math.log(x))
            got = tb.moricz_lower_value(s, lam, x)
        worst = max(worst, abs(ref - got))
    return worst <= 1e-9, f"max gap {worst:.1e}"


def _moment_verdicts():
    want = {"zipf_log2": ("convergent", "convergent"), "zipf_log1": ("convergent", "divergent"),
            "zipf_plain": ("divergent", "divergent")}
    got = {}
    for k in want:
        r = lln_lab.moment_check(laws.zipf(k), 10**8)
        got[k] = (r["LlogL"].verdict, r["mean"].verdict)
    return got == want, str(got)


def _truncated_mean():
    law = laws.poisson_like(2.0)
    m = law.truncated_mean(np.arange(1, 60))
    mono = np.all(np.diff(m) >= 0)
    z = laws.zipf("zipf_log2")
    mz = z.truncated_mean(np.array([10, 1000, 10**5]))
    return bool(mono and abs(m[-1] - 2.0) <= 1e-12 and np.all(np.diff(mz) > 0) and mz[-1] < z.mean()), \
        f"m_59 = {m[-1]!r}"


def _lln_determinism():
    law = laws.zipf("zipf_log1", signed=True)
    a = lln_lab.simulate_statement("vi", law, [1000, 5000], 4, 9, threads=1)
    b = lln_lab.simulate_statement("vi", law, [1000, 5000], 4, 9, threads=3)
    return bool(np.array_equal(a.trajectories, b.trajectories)), "threads 1 vs 3"


def _asclt():
    c = asclt_lab.asclt_curve("rademacher", 10**4, [-10.0, -1.0, 0.0, 1.0, 10.0], seed=1)
    h = math.fsum(1.0 / np.arange(1, 10**4 + 1)) / math.log(10**4)
    ok = np.all(np.diff(c.empirical) >= 0) and abs(c.empirical[-1] - h) <= 1e-12 and c.empirical[0] == 0
    return bool(ok), f"A(+10) = {c.empirical[-1]:.6f}"


def _sieve():
    S = nt.build_sieve(10**4)
    n = np.arange(1, 10**4 + 1)
    lam = S.mangoldt_array(1, 10**4 + 1)
    # sum over d | n of Lambda(d), accumulated by multiples
    acc = np.zeros(10**4 + 1)
    for d in np.flatnonzero(lam) + 1:
        acc[d::d] += lam[d - 1]
    err = np.max(np.abs(acc[1:] - np.log(n)))
    trial = sum(1 for k in range(2, 10**4 + 1) if all(k % p for p in range(2, math.isqrt(k) + 1)))
    return err <= 1e-12 and S.pi(10**4) == trial, f"pi = {S.pi(10**4)}, identity {err:.1e}"


def _density_chain():
    S = nt.build_sieve(10**5)
    ok = True
    for text in ("even", "ld:1", "primes", "pap:1,4", "ap:2,3"):
        r = nt.density_report(nt.parse_set(text), [10**3, 10**4, 10**5], (1.2,), sieve=S)
        ok &= r.chain_holds()
    return ok, "arith <= log <= log <= arith"


CHECKS = [
    ("lambert_w_grid", _w_grid),
    ("phi_roundtrip", _phi_roundtrip),
    ("constant_exactness", _constant_exactness),
    ("dn_and_chain_identities", _identities),
    ("regularity_row_sum", _regularity),
    ("borel_equals_poisson_pmethod", _borel_pmethod),
    ("one_sided_verdicts", _tauber_verdicts),
    ("moricz_exact_segments", _moricz_quadrature),
    ("moment_check_verdicts", _moment_verdicts),
    ("truncated_mean", _truncated_mean),
    ("lln_thread_determinism", _lln_determinism),
    ("asclt_monotone_mass", _asclt),
    ("sieve_mangoldt_identity", _sieve),
    ("density_chain", _density_chain),
]


def run_selftest(stream=None):
    """Run every check; returns ``[(name, ok, detail, seconds)]``."""
    results = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        results.append((name, bool(ok), detail, dt))
        if stream is not None:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail} ({dt:.2f}s)", file=stream)
    return results
