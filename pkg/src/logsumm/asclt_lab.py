"""Empirical almost-sure central limit functional.

``A_n(x) = (1/log n) sum_{k<=n} 1{S_k/sqrt(k) <= x}/k`` for a centred,
unit-variance step law, computed for a whole grid in one pass.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special_functions import normal_cdf

__all__ = ["AscltCurve", "asclt_curve", "draw_steps", "DEFAULT_GRID", "ASCLT_LAWS"]

ASCLT_LAWS = ("rademacher", "uniform_pm", "two_point_std")
DEFAULT_GRID = np.round(np.arange(-30, 31) / 10.0, 10)


@dataclass
class AscltCurve:
    x: np.ndarray
    empirical: np.ndarray
    reference: np.ndarray
    n: int
    seed: int
    law: str

    @property
    def sup_gap(self) -> float:
        return float(np.max(np.abs(self.empirical - self.reference)))

    def rows(self):
        return [
            {"x": float(a), "empirical": float(b), "reference": float(c)}
            for a, b, c in zip(self.x, self.empirical, self.reference)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "empirical", "reference"])
        for r in self.rows():
            w.writerow([repr(r["x"]), repr(r["empirical"]), repr(r["reference"])])
        return buf.getvalue()


def draw_steps(law: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. steps with mean 0 and variance 1.

    ``law`` is ``rademacher``, ``uniform_pm`` (uniform on ``[-sqrt 3, sqrt 3]``)
    or ``two_point_std:p`` (a standardised Bernoulli(p)).
    """
    name, _, arg = law.partition(":")
    if name == "rademacher":
        return rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0
    if name == "uniform_pm":
        r = math.sqrt(3.0)
        return rng.uniform(-r, r, size=n)
    if name == "two_point_std":
        p = float(arg) if arg else 0.5
        if not 0.0 < p < 1.0:
            raise DomainError("two_point_std needs 0 < p < 1")
        b = (rng.random(n) < p).astype(float)
        return (b - p) / math.sqrt(p * (1.0 - p))
    raise KeyError(f"unknown ASCLT law {law!r}")


def asclt_curve(law: str, n: int, x_grid=None, seed: int = 0) -> AscltCurve:
    """Weighted empirical CDF of ``S_k/sqrt(k)``, ``k <= n``, against Phi."""
    if n < 10:
        raise DomainError("n must be at least 10")
    x = DEFAULT_GRID if x_grid is None else np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size == 0 or np.any(np.diff(x) <= 0):
        raise DomainError("x_grid must be strictly increasing")
    rng = np.random.default_rng(seed)
    k = np.arange(1, n + 1, dtype=float)
    z = np.cumsum(draw_steps(law, n, rng)) / np.sqrt(k)
    # z <= x_g for every g >= first grid index with x_g >= z
    bins = np.searchsorted(x, z, side="left")
    mass = np.bincount(bins, weights=1.0 / k, minlength=x.size + 1)[: x.size]
    emp = np.cumsum(mass) / math.log(n)
    return AscltCurve(x, emp, normal_cdf(x), int(n), int(seed), law)
