"""Scalar kernels: Lambert W on [0, inf), phi and its inverse, li, Phi.

All functions accept Python floats or numpy arrays and return the same
shape (a float for scalar input).
"""
import math

import numpy as np
from scipy import integrate, special

from .errors import DomainError

__all__ = ["lambert_w", "phi", "phi_inv", "log_integral", "normal_cdf"]

_MAX_ITER = 50
_EPS = np.finfo(float).eps


def _as_nonneg(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative")
    return arr


def _out(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def _halley(z, w):
    """Halley steps for w*exp(w) = z; returns (w, converged mask)."""
    done = np.zeros(z.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        ew = np.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        dw = np.where(done, 0.0, dw)
        w = w - dw
        done |= np.abs(dw) <= 4 * _EPS * (1.0 + np.abs(w))
        if done.all():
            break
    return w, done


def _newton_log(z, w):
    """Newton steps for w + log w = log z, used where exp(w) would overflow."""
    lz = np.log(z)
    done = np.zeros(z.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        g = w + np.log(w) - lz
        dw = np.where(done, 0.0, g / (1.0 + 1.0 / w))
        w = w - dw
        done |= np.abs(dw) <= 4 * _EPS * (1.0 + np.abs(w))
        if done.all():
            break
    return w, done


def _bisect(z):
    lo = np.zeros_like(z)
    hi = np.maximum(1.0, np.log1p(z))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        big = mid * np.exp(mid) > z
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    return 0.5 * (lo + hi)


def lambert_w(z):
    """Principal branch of the Lambert W function for real ``z >= 0``.

    Solves ``w * exp(w) = z``. The starting point is ``z`` below 1,
    ``log z - log log z`` from ``e`` upward and a linear interpolation in
    between; Halley's iteration refines it (Newton on ``w + log w = log z``
    where ``exp(w)`` would overflow). Points that fail to converge within 50
    iterations are solved by bisection on ``[0, max(1, log(1 + z))]``.

    Raises
    ------
    DomainError
        If any argument is negative or not finite.
    """
    zarr = _as_nonneg(z, "z")
    flat = np.atleast_1d(zarr).astype(float).ravel()
    w = np.where(
        flat < 1.0,
        flat,
        np.where(
            flat < math.e,
            0.5671432904097838 + (1 - 0.5671432904097838) * (flat - 1.0) / (math.e - 1.0),
            np.log(np.maximum(flat, math.e)) - np.log(np.log(np.maximum(flat, math.e))),
        ),
    )
    huge = flat > 1e300
    ok = np.zeros(flat.shape, dtype=bool)
    out = np.empty_like(flat)
    if (~huge).any():
        wh, okh = _halley(flat[~huge], w[~huge])
        out[~huge], ok[~huge] = wh, okh
    if huge.any():
        wn, okn = _newton_log(flat[huge], w[huge])
        out[huge], ok[huge] = wn, okn
    out[flat == 0.0] = 0.0
    ok[flat == 0.0] = True
    bad = ~ok | (out < 0)
    if bad.any():
        out[bad] = _bisect(flat[bad])
    return _out(out.reshape(np.shape(zarr)), z)


def phi(x):
    """``(x + 1) * log(x + 1)`` for ``x >= 0``."""
    arr = _as_nonneg(x, "x")
    return _out((arr + 1.0) * np.log1p(arr), x)


def phi_inv(y):
    """Inverse of :func:`phi`, ``exp(W(y)) - 1`` (computed with ``expm1``)."""
    w = lambert_w(y)
    return _out(np.expm1(w), y)


def _li_scalar(x):
    if x == 2.0:
        return 0.0
    # t = exp(u) turns dt/log t into exp(u)/u du, smooth on [log 2, log x]
    val, _ = integrate.quad(
        lambda u: math.exp(u) / u, math.log(2.0), math.log(x),
        epsabs=0.0, epsrel=1e-13, limit=200,
    )
    return val


def log_integral(x):
    """Offset logarithmic integral ``li(x) = int_2^x dt / log t`` for ``x >= 2``.

    Evaluated by adaptive Gauss-Kronrod quadrature after the substitution
    ``t = exp(u)``.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 2.0):
        raise DomainError("log_integral requires finite x >= 2")
    vals = np.array([_li_scalar(float(v)) for v in np.atleast_1d(arr).ravel()])
    return _out(vals.reshape(arr.shape), x)


def normal_cdf(x):
    """Standard normal distribution function."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("normal_cdf requires finite input")
    return _out(special.ndtr(arr), x)
