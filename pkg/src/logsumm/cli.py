"""Command-line front end: ``logsumm <command> [flags]``.

Every run writes one data file (CSV or JSON) that begins with the package
version and an echo of the run configuration, plus a ``.meta.json`` sidecar
holding timing information. Data files are byte-identical for identical
configurations, whatever ``--threads`` is.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CapacityError, DomainError, LogsummError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CAPACITY, EXIT_SELFTEST = 0, 1, 2, 3, 4
OUTDIR_ENV = "LOGSUMM_OUTDIR"
# flags that never reach the config echo, so they cannot change the data bytes
_NOT_ECHOED = {"threads", "out", "func"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    out = []
    for v in text.split(","):
        v = v.strip()
        if not v:
            continue
        f = float(v)
        if f != int(f):
            raise argparse.ArgumentTypeError(f"{v!r} is not an integer")
        out.append(int(f))
    return out


# ------------------------------------------------------------------ commands

def _cmd_transform(a):
    from .sequences import parse_sequence
    from .transforms import evaluate
    from .laws import parse_law

    seq = parse_sequence(a.seq)
    law = parse_law(a.law) if a.law else None
    if a.method in ("ell", "movavg", "cesaro1", "pmethod"):
        if a.n is None:
            raise UsageError(f"--n is required for {a.method}")
        pts = a.n
    else:
        if a.x is None:
            raise UsageError(f"--x is required for {a.method}")
        pts = a.x
    lam = a.lam[0] if a.lam else None
    res = evaluate(a.method, seq, pts, lam=lam, convention=a.convention, law=law, tol=a.tol)
    rows = res.rows()
    last = rows[-1]
    return rows, f"{a.method}({a.seq}) at {last['point']!r} = {float(last['normalized'])!r}"


def _cmd_tauber(a):
    from . import tauberian as tb
    from .sequences import parse_sequence

    seq = parse_sequence(a.seq)
    ns = a.n or [10**3, 10**4, 10**5]
    if a.condition == "one_sided":
        profs = [tb.one_sided_condition(seq, a.lam or [1.05, 1.1, 1.2, 1.5, 2.0], ns)]
    elif a.condition == "thm4":
        profs = [tb.thm4_condition_ii(seq, a.lam or [1.5, 2.0, 3.0], a.x or [float(v) for v in ns])]
    elif a.condition == "thm6":
        profs = [tb.thm6_gap_condition(seq, a.r, a.lam or [0.05, 0.1, 0.2, 0.5], ns)]
    else:
        # both parities, so alternating sequences are not sampled on one phase only
        xs = a.x or sorted({float(v) for n in ns for v in (n, n + 1)})
        profs = list(tb.moricz_conditions(seq, a.lam or [1.05, 1.1, 1.2, 1.5],
                                          a.lam_lower or [0.5, 0.8, 0.9, 0.95], xs))
    rows = [r for p in profs for r in p.rows()]
    return rows, "; ".join(f"{p.condition}: {p.verdict} ({float(p.extrapolated)!r})" for p in profs)


def _cmd_lln(a):
    from . import lln_lab
    from .laws import parse_law

    law = parse_law(a.law or "zipf_log1:signed")
    st = a.statement
    if st == "moment":
        res = lln_lab.moment_check(law, a.n[-1] if a.n else 10**9)
        rows = [{"series": name, "N": int(c), "partial_sum": float(s), "increment": float(i)}
                for name, chk in res.items()
                for c, s, i in zip(chk.checkpoints, chk.partial_sums, chk.increments)]
        return rows, "; ".join(f"{k}: {v.verdict}" for k, v in res.items())
    if st == "exceedance":
        chk = lln_lab.exceedance_series(law, a.epsilon, a.n[-1] if a.n else 10**7)
        rows = [{"N": int(c), "partial_sum": float(s), "increment": float(i)}
                for c, s, i in zip(chk.checkpoints, chk.partial_sums, chk.increments)]
        return rows, f"exceedance: {chk.verdict}"
    if st == "truncated_mean":
        ks = np.asarray(a.n or [10, 100, 1000, 10**4, 10**5], dtype=np.int64)
        m = lln_lab.truncated_mean(law, ks)
        return [{"k": int(k), "m_k": float(v)} for k, v in zip(ks, np.atleast_1d(m))], \
            f"m_{int(ks[-1])} = {float(np.atleast_1d(m)[-1])!r}"
    params = {"beta": a.beta, "gamma": a.gamma, "epsilon": a.epsilon}
    rep = lln_lab.simulate_statement(st, law, a.n or [10**3, 10**4, 10**5], a.replicas, a.seed,
                                     params, threads=a.threads)
    if a.format == "json":
        return rep.to_dict(), f"statement {st}: median {float(rep.median[-1])!r}"
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    return rows, f"statement {st}: median {float(rep.median[-1])!r}"


def _cmd_asclt(a):
    from .asclt_lab import asclt_curve

    n = a.n[-1] if a.n else 10**5
    seeds = [a.seed + r for r in range(a.replicas)]
    run = lambda s: asclt_curve(a.law or "rademacher", n, a.x, s)
    if a.threads > 1:
        with ThreadPoolExecutor(max_workers=a.threads) as pool:
            curves = list(pool.map(run, seeds))
    else:
        curves = [run(s) for s in seeds]
    rows = [dict(seed=c.seed, n=c.n, **r) for c in curves for r in c.rows()]
    gaps = [c.sup_gap for c in curves]
    return rows, f"median sup_gap {float(np.median(gaps))!r} over {len(gaps)} seed(s)"


def _cmd_density(a):
    from . import number_theory as nt

    spec = nt.parse_set(a.set)
    ns = a.n or [10**3, 10**4, 10**5, 10**6]
    cap = a.limit or max(ns)
    sieve = nt.build_sieve(max(cap, max(ns)), a.threads) if spec.needs_sieve else None
    rep = nt.density_report(spec, ns, a.sigma or [1.2, 1.1, 1.05], sieve, cap)
    return rep.rows(), f"{spec.name}: arithmetic {float(rep.arithmetic[-1])!r}, logarithmic {float(rep.logarithmic[-1])!r}"


def _cmd_pnt(a):
    from . import number_theory as nt

    limit = a.limit or 10**6
    xs = a.x and [int(v) for v in a.x] or [10**k for k in range(3, int(math.log10(limit)) + 1)]
    sieve = nt.build_sieve(max(limit, max(xs)), a.threads)
    rows = nt.pnt_hierarchy_report(sieve, xs)
    return rows, f"pi({rows[-1]['x']}) = {rows[-1]['pi']}"


def _cmd_selftest(a):
    from .selftest import run_selftest

    results = run_selftest(sys.stdout)
    rows = [{"check": n, "status": "PASS" if ok else "FAIL", "detail": d} for n, ok, d, _ in results]
    failed = [n for n, ok, _, _ in results if not ok]
    if failed:
        raise _SelftestFailed(rows, failed)
    return rows, f"selftest: {len(results)} checks passed"


class _SelftestFailed(Exception):
    def __init__(self, rows, failed):
        super().__init__(", ".join(failed))
        self.rows = rows


# ------------------------------------------------------------------ output

def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return "" if v is None else str(v)


def render(payload, config: dict, fmt: str) -> str:
    echo = json.dumps(config, sort_keys=True, separators=(",", ":"))
    if fmt == "json":
        doc = {"version": __version__, "config": config, "data": _clean(payload)}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# logsumm {__version__}\n# config {echo}\n")
    rows = payload if isinstance(payload, list) else [payload]
    header = []
    for r in rows:
        header.extend(k for k in r if k not in header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in header])
    return buf.getvalue()


def _output_path(a) -> Path:
    if a.out:
        return Path(a.out)
    base = Path(os.environ.get(OUTDIR_ENV, "."))
    return base / f"{a.command}.{a.format}"


def _config(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items()) if k not in _NOT_ECHOED}


def _module_of(exc) -> str:
    mod = "logsumm"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        name = frame.f_globals.get("__name__", "")
        if name.startswith("logsumm"):
            mod = name
    return mod


# ------------------------------------------------------------------ parser

COMMANDS = {
    "transform": _cmd_transform,
    "tauber": _cmd_tauber,
    "lln": _cmd_lln,
    "asclt": _cmd_asclt,
    "density": _cmd_density,
    "pnt": _cmd_pnt,
    "selftest": _cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="logsumm", description="Logarithmic summability workbench.")
    p.add_argument("--version", action="version", version=f"logsumm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="output file (default: $LOGSUMM_OUTDIR/<command>.<format>)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--threads", type=int, default=1, help="worker cap; never changes results")
        sp.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("transform", help="evaluate a summability method")
    t.add_argument("--seq", required=True)
    t.add_argument("--method", required=True,
                   choices=("ell", "movavg", "L", "abel", "borel", "pmethod", "riesz_log", "cesaro1"))
    t.add_argument("--n", type=_ints)
    t.add_argument("--x", type=_floats)
    t.add_argument("--lambda", dest="lam", type=_floats)
    t.add_argument("--convention", choices=("log_n", "log_n_plus_1"), default="log_n")
    t.add_argument("--law", help="step law for pmethod")
    t.add_argument("--tol", type=float, default=1e-10)
    common(t)

    q = sub.add_parser("tauber", help="evaluate a Tauberian condition")
    q.add_argument("--seq", required=True)
    q.add_argument("--condition", choices=("one_sided", "thm4", "thm6", "moricz"), default="one_sided")
    q.add_argument("--lambda", dest="lam", type=_floats, help="lambda / alpha / delta grid")
    q.add_argument("--lambda-lower", dest="lam_lower", type=_floats)
    q.add_argument("--n", type=_ints)
    q.add_argument("--x", type=_floats)
    q.add_argument("--r", type=float, default=0.5, help="gap exponent for thm6")
    common(q)

    m = sub.add_parser("lln", help="strong-law laboratory")
    m.add_argument("--law")
    m.add_argument("--statement", default="vi",
                   choices=("moment", "exceedance", "truncated_mean", "ii", "iii", "iv", "vi", "vii", "viii", "ix"))
    m.add_argument("--n", type=_ints)
    m.add_argument("--replicas", type=int, default=50)
    m.add_argument("--beta", type=float, default=2.0)
    m.add_argument("--gamma", type=float, default=2.0)
    m.add_argument("--epsilon", type=float, default=1.0)
    common(m)

    s = sub.add_parser("asclt", help="almost-sure CLT curve")
    s.add_argument("--law", help="rademacher | uniform_pm | two_point_std:p")
    s.add_argument("--n", type=_ints)
    s.add_argument("--x", type=_floats)
    s.add_argument("--replicas", type=int, default=1, help="curves for seeds seed..seed+replicas-1")
    common(s)

    d = sub.add_parser("density", help="densities of an integer set")
    d.add_argument("--set", required=True)
    d.add_argument("--n", type=_ints)
    d.add_argument("--sigma", type=_floats)
    d.add_argument("--limit", type=int, help="analytic cap and sieve size")
    common(d)

    r = sub.add_parser("pnt", help="prime number theorem hierarchy")
    r.add_argument("--limit", type=int)
    r.add_argument("--x", type=_floats)
    common(r)

    st = sub.add_parser("selftest", help="run the reduced-scale invariant suite")
    common(st)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if a.threads < 1:
        print("logsumm: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    started = time.time()
    code = EXIT_OK
    try:
        payload, summary = COMMANDS[a.command](a)
    except _SelftestFailed as e:
        payload, summary, code = e.rows, f"selftest failed: {e}", EXIT_SELFTEST
    except UsageError as e:
        print(f"logsumm {a.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as e:
        print(f"logsumm {a.command}: error: {e.args[0] if e.args else e}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as e:
        print(f"{_module_of(e)}: capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, LogsummError) as e:
        print(f"{_module_of(e)}: domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"logsumm {a.command}: I/O error: {e}", file=sys.stderr)
        return EXIT_USAGE
    path = _output_path(a)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render(payload, _config(a), a.format))
        meta = {"started": started, "elapsed_s": time.time() - started, "threads": a.threads,
                "version": __version__, "data_file": path.name}
        Path(str(path) + ".meta.json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    except OSError as e:
        print(f"logsumm {a.command}: I/O error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{summary} -> {path}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
