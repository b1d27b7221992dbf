"""Performance and stability bounds for single-edge modifications.

Everything here is driven by the entrywise-absolute resolvent
X = (I - |A|)^{-1}, defined whenever rho(|A|) < 1.  From X come the
scalar constants

    alpha_ij = |w| / (1 - |w| X[i,j]),   alpha = max_{i != j} alpha_ij,
    beta  = max(2 max_off X,  max_off X + max_j ||X e_j||),
    gamma = max_k (X^T X)[k,k],          gamma_bar = max_k (X|B||B|^T X^T)[k,k],

used to bound the trace, trace-inverse and log-det of the Gramian before
and after adding weight w to edge i -> j, and the interval of weights w
for which the modified network is guaranteed stable
(|w| < 1 / X[i,j], exact for nonnegative A and w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlphaUndefined,
    InvalidInput,
    InvalidJunction,
    LambdaTildeTooSmall,
    NotPD,
    PreconditionViolated,
    UnstableAbsSystem,
    ZeroVector,
)
from .netmodel import NetworkSystem, MetricId, TRACE, LOGDET, NEG_TRACE_INV, finite_gramian

__all__ = [
    "XConstants",
    "BoundsReport",
    "WeightInterval",
    "x_constants",
    "trace_bounds",
    "trinv_lower_bounds",
    "logdet_upper_bounds",
    "stability_weight_interval",
    "global_weight_bound",
    "stembud_equal_weight_analysis",
    "lambda1_rank_one_bound",
    "psd_norm_bounds",
]


@dataclass(frozen=True)
class XConstants:
    """Resolvent X = (I - |A|)^{-1} and the derived bound constants."""

    X: np.ndarray
    w: float
    alpha: float
    beta: float
    gamma: float
    gamma_bar: float
    trHX: float

    def alpha_edge(self, i: int, j: int) -> float:
        """Per-edge alpha_ij for the stored w (1-based indices)."""
        den = 1.0 - abs(self.w) * self.X[i - 1, j - 1]
        if den <= 0.0:
            raise AlphaUndefined(f"1 - |w| X[{i},{j}] = {den:.3g} <= 0")
        return abs(self.w) / den

    @property
    def max_offdiag(self) -> float:
        off = self.X - np.diag(np.diag(self.X))
        return float(off.max())


@dataclass(frozen=True)
class WeightInterval:
    """Open interval of admissible weight deltas on one edge."""

    lower: float
    upper: float
    bounded: bool

    def contains(self, w: float) -> bool:
        return self.lower < w < self.upper


@dataclass(frozen=True)
class BoundsReport:
    """Pre/post-modification bound pair for one metric and edge."""

    metric: MetricId
    edge: tuple
    w: float
    unmodified_bound: float
    modified_bound: float
    constants: XConstants
    sigma: int | None = None
    sigma_modified: int | None = None
    tau: float | None = None
    literature_bound: float | None = None


def _abs_resolvent(sys: NetworkSystem) -> np.ndarray:
    absA = np.abs(sys.A)
    rho = float(np.abs(np.linalg.eigvals(absA)).max()) if sys.n else 0.0
    if rho >= 1.0:
        raise UnstableAbsSystem(f"rho(|A|) = {rho:.6g} >= 1")
    return np.linalg.solve(np.eye(sys.n) - absA, np.eye(sys.n))


def x_constants(sys: NetworkSystem, w: float) -> XConstants:
    """All Eq-level constants for modification weight w.

    Requires rho(|A|) < 1; alpha additionally needs
    |w| * max_offdiag(X) < 1, otherwise the maximizing pair's denominator
    is nonpositive and AlphaUndefined is raised.
    """
    X = _abs_resolvent(sys)
    off = X - np.diag(np.diag(X))
    xmax = float(off.max()) if sys.n > 1 else 0.0
    den = 1.0 - abs(w) * xmax
    if den <= 0.0:
        raise AlphaUndefined(
            f"|w| = {abs(w):.6g} with max offdiagonal X = {xmax:.6g} makes alpha undefined"
        )
    alpha = abs(w) / den
    col_norms = np.linalg.norm(X, axis=0)
    beta = max(2.0 * xmax, xmax + float(col_norms.max()))
    gamma = float((X * X).sum(axis=0).max())
    XB = X @ np.abs(sys.B)
    gamma_bar = float((XB * XB).sum(axis=1).max())
    trHX = float((XB * XB).sum())
    return XConstants(X, float(w), alpha, beta, gamma, gamma_bar, trHX)


def _check_edge(sys, edge):
    i, j = edge
    if not (1 <= i <= sys.n and 1 <= j <= sys.n):
        raise InvalidInput(f"edge ({i},{j}) outside 1..{sys.n}")
    if i == j:
        raise InvalidInput("modification bounds require i != j (no self-loops)")
    return i, j


def _check_modified_stable(sys, edge, w):
    i, j = edge
    absA = np.abs(sys.A).copy()
    absA[j - 1, i - 1] += abs(w)
    rho = float(np.abs(np.linalg.eigvals(absA)).max())
    if rho >= 1.0:
        raise PreconditionViolated(
            f"rho(|A| + |w| e_j e_i^T) = {rho:.6g} >= 1 for edge ({i},{j}), w = {w:.6g}"
        )


def _modified_trace_bound(c: XConstants) -> float:
    return (1.0 + c.alpha * c.beta) * c.trHX + c.alpha**2 * c.gamma * c.gamma_bar


def trace_bounds(sys: NetworkSystem, edge, w: float) -> BoundsReport:
    """Upper bounds on tr(W) before and after adding w to edge i -> j.

    Unmodified: tr(W_T) <= tr(W_inf) <= tr(H_X) with
    H_X = X |B||B|^T X^T.  Modified: tr <= (1 + alpha beta) tr(H_X)
    + alpha^2 gamma gamma_bar.  When lambda_1(A A^T) < 1 the report also
    carries the comparison bound tr(B B^T) / (1 - lambda_1(A A^T)) from
    the literature (None when unavailable).
    """
    i, j = _check_edge(sys, edge)
    c = x_constants(sys, w)
    _check_modified_stable(sys, edge, w)
    lam1 = float(np.linalg.eigvalsh(sys.A @ sys.A.T)[-1])
    lit = float(np.trace(sys.B @ sys.B.T) / (1.0 - lam1)) if lam1 < 1.0 else None
    return BoundsReport(
        TRACE, (i, j), float(w), c.trHX, _modified_trace_bound(c), c, literature_bound=lit
    )


def trinv_lower_bounds(sys: NetworkSystem, edge, w: float) -> BoundsReport:
    """Lower bounds on tr(W^{-1}): n^2/tr(H_X) and its modified analogue."""
    i, j = _check_edge(sys, edge)
    c = x_constants(sys, w)
    _check_modified_stable(sys, edge, w)
    n2 = float(sys.n) ** 2
    return BoundsReport(
        NEG_TRACE_INV, (i, j), float(w), n2 / c.trHX, n2 / _modified_trace_bound(c), c
    )


def _logdet_cap(n: int, trace_value: float, sigma: int) -> float:
    return sigma * n * math.log(trace_value / n ** (1.0 / sigma))


def logdet_upper_bounds(sys: NetworkSystem, edge, w: float, T: int) -> BoundsReport:
    """Upper bounds on log det(W) before and after modification.

    The branch parameter is sigma = 1 when tr(W_T) <= 1 and 2 otherwise;
    the modified bound replaces tr(H_X) by
    tau = (1 + alpha beta) tr(H_X) + alpha^2 gamma gamma_bar and picks
    its own sigma from tau.
    """
    i, j = _check_edge(sys, edge)
    c = x_constants(sys, w)
    _check_modified_stable(sys, edge, w)
    trW = finite_gramian(sys, T).trace()
    sigma = 1 if trW <= 1.0 else 2
    tau = _modified_trace_bound(c)
    sigma_mod = 1 if tau <= 1.0 else 2
    return BoundsReport(
        LOGDET,
        (i, j),
        float(w),
        _logdet_cap(sys.n, c.trHX, sigma),
        _logdet_cap(sys.n, tau, sigma_mod),
        c,
        sigma=sigma,
        sigma_modified=sigma_mod,
        tau=tau,
    )


def stability_weight_interval(sys: NetworkSystem, edge) -> WeightInterval:
    """Weights w for which A + w e_j e_i^T is guaranteed stable.

    The interval is (-1/X[i,j], 1/X[i,j]); X[i,j] accumulates the weight
    products of all return paths j -> i, so a zero entry means the new
    edge closes no cycle and the interval is unbounded.  Sufficient in
    general, and exact for A >= 0 with w >= 0.
    """
    i, j = _check_edge(sys, edge)
    X = _abs_resolvent(sys)
    xij = float(X[i - 1, j - 1])
    if xij == 0.0:
        return WeightInterval(-math.inf, math.inf, False)
    return WeightInterval(-1.0 / xij, 1.0 / xij, True)


def global_weight_bound(sys: NetworkSystem) -> float:
    """Largest w admissible on every edge at once: 1 / max_offdiag(X).

    Returns inf when X has no positive off-diagonal entry (then no
    single-edge modification can close a cycle).
    """
    X = _abs_resolvent(sys)
    off = X - np.diag(np.diag(X))
    xmax = float(off.max()) if sys.n > 1 else 0.0
    if xmax == 0.0:
        return math.inf
    return 1.0 / xmax


def stembud_equal_weight_analysis(a: float, n: int, y: int) -> tuple[float, float]:
    """Equal-weight stem-bud results: bud-edge stability bound and trace cap.

    For chain and back weights all equal to a in [0, 1), a modification
    w > 0 on a single bud edge keeps the network stable for
    w < (1 - a^Lb) / a^(Lb-1), and with the single input at node 1 the
    Gramian trace is at most
    sum_{k=0}^{y-2} a^{2k} + sum_{k=y-1}^{n-1} a^{2k} / (1 - a^Lb)^2.
    """
    if not 0.0 <= a < 1.0:
        raise InvalidInput(f"weight a must be in [0, 1), got {a}")
    if n < 2:
        raise InvalidInput(f"need n >= 2, got {n}")
    if not 1 <= y <= n - 1:
        raise InvalidJunction(f"junction y={y} outside 1..{n - 1}")
    L_b = n - y + 1
    if a == 0.0:
        bud_w_bound = math.inf
    else:
        bud_w_bound = (1.0 - a**L_b) / a ** (L_b - 1)
    shrink = (1.0 - a**L_b) ** 2
    trace_bound = sum(a ** (2 * k) for k in range(0, y - 1))
    trace_bound += sum(a ** (2 * k) for k in range(y - 1, n)) / shrink
    return bud_w_bound, trace_bound


def lambda1_rank_one_bound(v, i: int) -> float:
    """Largest-eigenvalue bound for U = v e_i^T + e_i v^T.

    Equals 2 v[i] when U has rank one (v parallel to e_i) and bounds
    lambda_1 by v[i] + ||v|| otherwise.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    n = v.shape[0]
    if not 1 <= i <= n:
        raise InvalidInput(f"index {i} outside 1..{n}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ZeroVector("v must be nonzero")
    vi = float(v[i - 1])
    residual = v.copy()
    residual[i - 1] = 0.0
    if float(np.linalg.norm(residual)) <= 1e-12 * norm:
        return 2.0 * vi
    return vi + norm


def psd_norm_bounds(Z, lambda_tilde: float) -> tuple[float, float]:
    """Frobenius-norm-squared bracket for a symmetric PD matrix.

    Returns (tr(Z)^2 / n, lambda_tilde * tr(Z)); the squared Frobenius
    norm of Z is guaranteed to lie between them.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise NotPD(f"Z must be square, got shape {Z.shape}")
    if np.linalg.norm(Z - Z.T) > 1e-10 * (1.0 + np.linalg.norm(Z)):
        raise NotPD("Z is not symmetric")
    n = Z.shape[0]
    vals = np.linalg.eigvalsh(0.5 * (Z + Z.T))
    if vals[0] <= 0.0:
        raise NotPD(f"smallest eigenvalue {vals[0]:.3g} <= 0")
    lam1 = float(vals[-1])
    if lambda_tilde < lam1 * (1.0 - 1e-12):
        raise LambdaTildeTooSmall(f"lambda_tilde = {lambda_tilde:.6g} < lambda_1 = {lam1:.6g}")
    tr = float(np.trace(Z))
    lower = tr * tr / n
    upper = float(lambda_tilde) * tr
    fro2 = float((Z * Z).sum())
    if not (lower <= fro2 * (1.0 + 1e-9) and fro2 <= upper * (1.0 + 1e-9)):
        raise NotPD("numerical inconsistency: ||Z||_F^2 escaped its bracket")
    return lower, upper
