"""Curve fitting for the global-estimate procedure.

Maps noisy (h, f) pairs, where each f is a metric value and h its
upper bound, to an estimate of f at a much larger bound value h_g.
Primary model: degree-3/3 rational fitted by linearized least squares
(denominator leading coefficient pinned to 1), accepted only when the
fitted denominator is root-free and the fit is nondecreasing over the
whole data-plus-evaluation interval.  Because that acceptance is rare on
noisy clouds, the workhorse fallback fits a monotone saturating 1/1
rational  f(h) = c - a / (h - p),  pole p left of the data, which keeps
the evaluation at a far-away h_g finite and anchored to the level the
data flattens toward.  Inside the data hull the fallback is a monotone
piecewise-cubic (PCHIP) interpolant of the isotonic-pooled points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import FitDegenerate

__all__ = ["FitResult", "fit_and_evaluate", "pool_monotone"]

MIN_DISTINCT = 6
# pole-distance grid for the saturating 1/1 rational, in units of data span
POLE_GRID = np.geomspace(1e-3, 1e3, 160)


@dataclass(frozen=True)
class FitResult:
    """Evaluated estimate plus diagnostics of the path taken."""

    value: float
    method: str  # "rational33" | "pchip" | "saturating11" | "flat"
    residual_norm: float
    used_fallback: bool
    n_pooled: int


def _distinct_count(h) -> int:
    h = np.sort(np.asarray(h, dtype=float))
    if h.size == 0:
        return 0
    tol = 1e-9 * max(1.0, float(np.abs(h).max()))
    return 1 + int(np.sum(np.diff(h) > tol))


def pool_monotone(h, f):
    """Isotonic pooling: dedup h, then pool adjacent violators of monotone f.

    Returns strictly increasing abscissae with nondecreasing ordinates,
    the L2 projection of the cloud onto monotone step data.
    """
    h = np.asarray(h, dtype=float)
    f = np.asarray(f, dtype=float)
    order = np.argsort(h, kind="stable")
    h, f = h[order], f[order]
    tol = 1e-9 * max(1.0, float(np.abs(h).max()))
    hs, fs, ws = [], [], []
    for hv, fv in zip(h, f):
        if hs and hv - hs[-1] <= tol:
            fs[-1] = (fs[-1] * ws[-1] + fv) / (ws[-1] + 1)
            ws[-1] += 1
        else:
            hs.append(float(hv))
            fs.append(float(fv))
            ws.append(1)
    out_h, out_f, out_w = [], [], []
    for hv, fv, wv in zip(hs, fs, ws):
        out_h.append(hv)
        out_f.append(fv)
        out_w.append(wv)
        while len(out_f) >= 2 and out_f[-1] < out_f[-2]:
            wsum = out_w[-1] + out_w[-2]
            fmerge = (out_f[-1] * out_w[-1] + out_f[-2] * out_w[-2]) / wsum
            hmerge = (out_h[-1] * out_w[-1] + out_h[-2] * out_w[-2]) / wsum
            out_h[-2:] = [hmerge]
            out_f[-2:] = [fmerge]
            out_w[-2:] = [wsum]
    return np.array(out_h), np.array(out_f)


def _rational33(hs, fs, hg):
    """Levy-linearized 3/3 rational; None unless pole-free and monotone."""
    lo = min(float(hs[0]), hg)
    hi = max(float(hs[-1]), hg)
    if hi <= lo:
        return None
    # map the working interval onto [1, 2] to keep the cubic denominator
    # away from the origin
    x = 1.0 + (hs - lo) / (hi - lo)
    xg = 1.0 + (hg - lo) / (hi - lo)
    M = np.column_stack([x**3, x**2, x, np.ones_like(x), -fs * x**2, -fs * x, -fs])
    coef, *_ = np.linalg.lstsq(M, fs * x**3, rcond=None)
    a3, a2, a1, a0, b2, b1, b0 = coef
    grid = np.linspace(1.0, 2.0, 1024)
    q = grid**3 + b2 * grid**2 + b1 * grid + b0
    if np.any(np.abs(q) < 1e-13) or np.any(np.sign(q[:-1]) != np.sign(q[1:])):
        return None
    vals = (a3 * grid**3 + a2 * grid**2 + a1 * grid + a0) / q
    span = float(vals.max() - vals.min())
    if np.any(np.diff(vals) < -1e-9 * max(1.0, span)):
        return None
    value = (a3 * xg**3 + a2 * xg**2 + a1 * xg + a0) / (xg**3 + b2 * xg**2 + b1 * xg + b0)
    fitted = (a3 * x**3 + a2 * x**2 + a1 * x + a0) / (x**3 + b2 * x**2 + b1 * x + b0)
    return float(value), float(np.linalg.norm(fs - fitted))


def _saturating11(hs, fs, hg):
    """Best-fitting increasing 1/1 rational, evaluated at hg.

    The pole position is scanned over a fixed geometric grid left of the
    data; (c, a) follow by linear least squares.  Always finite at
    hg > max(h); saturates at c when hg is far beyond the data.
    """
    lo, hi = float(hs[0]), float(hs[-1])
    span = max(hi - lo, 1e-9 * max(1.0, abs(hi)))
    best = None
    for dist in span * POLE_GRID:
        p = lo - dist
        x = 1.0 / (hs - p)
        M = np.column_stack([np.ones_like(x), -x])
        sol, *_ = np.linalg.lstsq(M, fs, rcond=None)
        c, a = float(sol[0]), float(sol[1])
        if a < 0.0:
            continue
        r = fs - (c - a * x)
        sse = float(r @ r)
        if best is None or sse < best[0]:
            best = (sse, c, a, p)
    if best is None:
        return float(fs[-1]), float(np.linalg.norm(fs - fs[-1]))
    sse, c, a, p = best
    return float(c - a / (hg - p)), float(np.sqrt(sse))


def fit_and_evaluate(h, f, hg: float) -> FitResult:
    """Fit the (h, f) cloud and evaluate the curve at hg.

    Raises FitDegenerate when fewer than MIN_DISTINCT distinct h values
    are available.
    """
    h = np.asarray(h, dtype=float)
    f = np.asarray(f, dtype=float)
    if h.shape != f.shape or h.ndim != 1:
        raise FitDegenerate("h and f must be equal-length 1-d arrays")
    distinct = _distinct_count(h)
    if distinct < MIN_DISTINCT:
        raise FitDegenerate(f"only {distinct} distinct bound values (need >= {MIN_DISTINCT})")
    hs, fs = pool_monotone(h, f)
    rat = _rational33(hs, fs, float(hg))
    if rat is not None:
        value, resid = rat
        return FitResult(value, "rational33", resid, False, len(hs))
    if len(hs) == 1:
        return FitResult(float(fs[0]), "flat", 0.0, True, 1)
    if hs[0] <= hg <= hs[-1]:
        value = float(PchipInterpolator(hs, fs)(hg))
        return FitResult(value, "pchip", 0.0, True, len(hs))
    value, resid = _saturating11(hs, fs, float(hg))
    return FitResult(value, "saturating11", resid, True, len(hs))
