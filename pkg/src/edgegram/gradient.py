"""First-order variation of Gramian metrics with respect to edge weights.

For a symmetric weight matrix P the matrix Theta_P collects, entrywise,
half the derivative of tr(P * W(T)) with respect to each edge weight:
2 * Theta_P[j-1, i-1] = d tr(P W) / d a_ji.  Choosing P per metric turns
this into the gradient of trace (P = I), log-det (P = W^{-1}),
-trace-inverse (P = W^{-2}) or a simple eigenvalue (P = v_i v_i^T).

The production evaluation uses the O(T n^3) rearrangement

    Theta_P^k = sum_{u=0}^{T-2} K_u D^k_{T-2-u},
    K_0 = P,  K_u = A^T K_{u-1} A,
    D^k_j = sum_{s=0}^{j} (A^{s+1} b_k)(A^s b_k)^T,

which is algebraically identical to the literal double sum over (t, s);
the literal form is kept as a test oracle in `theta_matrix_literal`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricP, InvalidInput, RepeatedEigenvalue, UnstableSystem
from .netmodel import (
    GramianResult,
    Horizon,
    MetricId,
    NetworkSystem,
    STABILITY_MARGIN,
    _eigh_descending,
    _readonly,
    _require_invertible,
    _smith_doubling,
    finite_gramian,
    evaluate_metric,
    stability_info,
)

__all__ = [
    "ThetaResult",
    "GradientMatrix",
    "theta_matrix",
    "theta_matrix_literal",
    "metric_gradient",
    "fd_gradient_oracle",
    "lyapunov_gradient",
    "metric_weight_matrix",
]

# Relative eigen-gap below which the eigenvalue gradient is refused.
EIGENGAP_RTOL = 1e-8


@dataclass(frozen=True)
class ThetaResult:
    """Per-input matrices Theta_P^k and their sum Theta_P."""

    per_input: tuple
    total: np.ndarray
    P_used: np.ndarray
    T: Horizon


@dataclass(frozen=True)
class GradientMatrix:
    """Gradient G with G[j-1, i-1] = df/da_ji for a chosen metric."""

    G: np.ndarray
    metric: MetricId
    T: Horizon


def _check_symmetric_P(P, n):
    P = np.asarray(P, dtype=float)
    if P.shape != (n, n):
        raise InvalidInput(f"P must be {n}x{n}, got {P.shape}")
    scale = np.linalg.norm(P)
    if np.linalg.norm(P - P.T) > 1e-10 * (1.0 + scale):
        raise AsymmetricP("P is not symmetric within 1e-10")
    return 0.5 * (P + P.T)


def theta_matrix(sys: NetworkSystem, T: int | Horizon, P) -> ThetaResult:
    """Theta_P and its per-input decomposition at a finite horizon.

    The K_u sequence is shared across inputs; each input walks its
    impulse response once, so the cost is O(T n^3 + T m n^2).
    """
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    if not horizon.is_finite:
        raise InvalidInput("theta_matrix needs a finite horizon")
    P = _check_symmetric_P(P, sys.n)
    Tn = horizon.steps
    n, m = sys.n, sys.m
    A = sys.A
    if Tn == 1:
        per = tuple(_readonly(np.zeros((n, n))) for _ in range(m))
        return ThetaResult(per, _readonly(np.zeros((n, n))), _readonly(P), horizon)
    Ks = np.empty((Tn - 1, n, n))
    Ks[0] = P
    for u in range(1, Tn - 1):
        Ks[u] = A.T @ Ks[u - 1] @ A
    per = []
    for k in range(m):
        g_prev = np.array(sys.B[:, k])
        g_cur = A @ g_prev
        D = np.zeros((n, n))
        theta = np.zeros((n, n))
        for j in range(Tn - 1):
            D += np.outer(g_cur, g_prev)
            theta += Ks[Tn - 2 - j] @ D
            g_prev, g_cur = g_cur, A @ g_cur
        per.append(_readonly(theta))
    total = np.zeros((n, n))
    for theta in per:
        total += theta
    return ThetaResult(tuple(per), _readonly(total), _readonly(P), horizon)


def theta_matrix_literal(sys: NetworkSystem, T: int | Horizon, P) -> ThetaResult:
    """Literal evaluation from the controllability/observability factors.

    Test oracle: builds, for each t, the block matrices whose columns are
    A^s^T P A^t h_k and whose rows are (A^r h_k)^T, and sums their
    products.  O(T^2) matrix products; do not use in production paths.
    """
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    if not horizon.is_finite:
        raise InvalidInput("theta_matrix_literal needs a finite horizon")
    P = _check_symmetric_P(P, sys.n)
    Tn = horizon.steps
    n, m = sys.n, sys.m
    A = sys.A
    per = []
    for k in range(m):
        h = sys.B[:, k]
        # A^t h for t = 0..Tn-1
        powers = [h]
        for _ in range(Tn - 1):
            powers.append(A @ powers[-1])
        theta = np.zeros((n, n))
        for t in range(1, Tn):
            # columns of C are A^s^T P A^t h for s = t-1 .. 0,
            # rows of O are (A^r h)^T for r = 0 .. t-1
            cols = [P @ powers[t]]
            for _ in range(t - 1):
                cols.append(A.T @ cols[-1])
            C = np.empty((n, t))
            for idx, s in enumerate(range(t - 1, -1, -1)):
                C[:, idx] = cols[s]
            O = np.empty((t, n))
            for r in range(t):
                O[r] = powers[r]
            theta += C @ O
        per.append(_readonly(theta))
    total = np.zeros((n, n))
    for theta in per:
        total += theta
    return ThetaResult(tuple(per), _readonly(total), _readonly(P), horizon)


def metric_weight_matrix(sys: NetworkSystem, T: int | Horizon, metric: MetricId):
    """The symmetric P matching a metric's gradient, and the Gramian used.

    P is built from one eigendecomposition of W so that W^{-1} and W^{-2}
    share a factorization and are exactly symmetric.
    """
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    W = finite_gramian(sys, horizon)
    n = sys.n
    if metric.kind == "trace":
        return np.eye(n), W
    if metric.kind in ("logdet", "neg_trace_inv"):
        _require_invertible(W)
        vals, vecs = _eigh_descending(W.W)
        power = -1.0 if metric.kind == "logdet" else -2.0
        P = (vecs * vals**power) @ vecs.T
        return 0.5 * (P + P.T), W
    if metric.kind in ("lambda", "lambda_min"):
        i = metric.eig_index(n)
        vals, vecs = _eigh_descending(W.W)
        gaps = np.abs(np.delete(vals, i - 1) - vals[i - 1])
        scale = abs(vals[0]) if vals[0] != 0 else 1.0
        if n > 1 and gaps.min() < EIGENGAP_RTOL * scale:
            raise RepeatedEigenvalue(
                f"eigenvalue {i} has relative gap {gaps.min() / scale:.3g} < {EIGENGAP_RTOL}"
            )
        v = vecs[:, i - 1]
        return np.outer(v, v), W
    raise InvalidInput(f"unknown metric {metric}")


def metric_gradient(sys: NetworkSystem, T: int | Horizon, metric: MetricId) -> GradientMatrix:
    """Gradient of a performance metric at horizon T: G = 2 Theta_P.

    P is held constant at its value for the unmodified system, which is
    exactly what makes 2 Theta_P the true metric gradient for each of the
    four supported metrics.
    """
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    P, _ = metric_weight_matrix(sys, horizon, metric)
    theta = theta_matrix(sys, horizon, P)
    return GradientMatrix(_readonly(2.0 * theta.total), metric, horizon)


def fd_gradient_oracle(
    sys: NetworkSystem, T: int | Horizon, metric: MetricId, step: float = 1e-6
) -> GradientMatrix:
    """Central finite differences of the metric over every edge weight.

    Independent verification oracle; evaluates the metric from scratch at
    2 n^2 perturbed systems.
    """
    if not 1e-9 <= step <= 1e-3:
        raise InvalidInput(f"step {step} outside [1e-9, 1e-3]")
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    n = sys.n
    G = np.empty((n, n))
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            a = sys.edge_weight(i, j)
            h = step * (1.0 + abs(a))
            up = evaluate_metric(finite_gramian(sys.with_edge(i, j, a + h), horizon), metric)
            dn = evaluate_metric(finite_gramian(sys.with_edge(i, j, a - h), horizon), metric)
            G[j - 1, i - 1] = (up - dn) / (2.0 * h)
    return GradientMatrix(_readonly(G), metric, horizon)


def lyapunov_gradient(sys: NetworkSystem, edge: tuple[int, int]) -> np.ndarray:
    """Derivative of the infinite-horizon Gramian along one edge weight.

    Solves A Wdot A^T - Wdot + F = 0 with the forcing term
    F = e_j e_i^T Winf A^T + A Winf e_i e_j^T obtained by differentiating
    the Lyapunov equation; uses the same Smith-doubling solver as the
    infinite Gramian, with F in place of B B^T.
    """
    i, j = edge
    rho, _ = stability_info(sys.A)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableSystem(f"rho(A) = {rho:.6g}; Lyapunov gradient needs rho(A) < 1")
    n = sys.n
    if not (1 <= i <= n and 1 <= j <= n):
        raise InvalidInput(f"edge ({i},{j}) outside 1..{n}")
    Q = sys.B @ sys.B.T
    Winf = _smith_doubling(sys.A, Q)
    row = (Winf @ sys.A.T)[i - 1]  # e_i^T Winf A^T
    F = np.zeros((n, n))
    F[j - 1, :] += row
    F[:, j - 1] += row
    Wdot = _smith_doubling(sys.A, F)
    return _readonly(0.5 * (Wdot + Wdot.T))
