"""Core system representation and Gramian computation.

A network of ``n`` nodes with ``m`` actuators follows the discrete-time
dynamics ``x(t+1) = A x(t) + B u(t)``.  The edge ``i -> j`` with weight
``w`` is stored at entry ``(j, i)`` of ``A`` (1-based node indices in the
public API).  Controllability over a horizon ``T`` is quantified through
the reachability Gramian

    W(T) = sum_{t=0}^{T-1} A^t B B^T (A^t)^T,

and, for stable ``A``, its infinite-horizon limit solving the discrete
Lyapunov equation ``A W A^T - W + B B^T = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidInput,
    NonFinite,
    SingularGramian,
    UnstableSystem,
)

__all__ = [
    "NetworkSystem",
    "Horizon",
    "GramianResult",
    "MetricId",
    "TRACE",
    "LOGDET",
    "NEG_TRACE_INV",
    "LAMBDA_MIN",
    "lambda_metric",
    "build_system",
    "finite_gramian",
    "infinite_gramian",
    "stability_info",
    "evaluate_metric",
    "control_energy",
]

# Spectral radii closer to 1 than this margin are treated as unstable.
STABILITY_MARGIN = 1e-12

# Relative floor on the smallest Gramian eigenvalue below which
# inverse-based metrics are refused (declared singular).
SINGULARITY_RTOL = 1e-12


def _readonly(M):
    out = np.array(M, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class NetworkSystem:
    """Validated (A, B) pair.

    ``A[j-1, i-1]`` holds the weight of edge ``i -> j``; column ``k`` of
    ``B`` is the actuation vector of input ``k``.  Arrays are read-only,
    so instances are safe to share across threads.
    """

    n: int
    m: int
    A: np.ndarray
    B: np.ndarray

    def edge_weight(self, i: int, j: int) -> float:
        """Weight of edge i -> j (1-based node indices)."""
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise IndexOutOfRange(f"edge ({i},{j}) outside 1..{self.n}")
        return float(self.A[j - 1, i - 1])

    def with_edge(self, i: int, j: int, w: float) -> "NetworkSystem":
        """Copy of the system with the weight of edge i -> j set to w."""
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise IndexOutOfRange(f"edge ({i},{j}) outside 1..{self.n}")
        A = np.array(self.A)
        A[j - 1, i - 1] = w
        return NetworkSystem(self.n, self.m, _readonly(A), self.B)


@dataclass(frozen=True)
class Horizon:
    """Finite number of steps, or None for the infinite horizon."""

    steps: int | None

    def __post_init__(self):
        if self.steps is not None:
            if int(self.steps) != self.steps or self.steps < 1:
                raise InvalidInput(f"finite horizon must be an integer >= 1, got {self.steps}")

    @property
    def is_finite(self) -> bool:
        return self.steps is not None

    @classmethod
    def finite(cls, T: int) -> "Horizon":
        return cls(int(T))

    @classmethod
    def infinite(cls) -> "Horizon":
        return cls(None)

    def __str__(self):
        return "inf" if self.steps is None else str(self.steps)


@dataclass(frozen=True)
class GramianResult:
    """Symmetric PSD Gramian with its horizon tag and conditioning info."""

    W: np.ndarray
    horizon: Horizon
    min_eig: float
    symmetrized: bool = True

    @property
    def n(self) -> int:
        return self.W.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.W))


@dataclass(frozen=True)
class MetricId:
    """Identifier of a Gramian-based performance metric.

    ``kind`` is one of ``trace``, ``logdet``, ``neg_trace_inv``,
    ``lambda`` (with a 1-based ``index`` into the descending spectrum) or
    ``lambda_min`` (resolves to index n at evaluation time).
    """

    kind: str
    index: int | None = None

    _KINDS = ("trace", "logdet", "neg_trace_inv", "lambda", "lambda_min")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvalidInput(f"unknown metric kind {self.kind!r}")
        if self.kind == "lambda":
            if self.index is None or self.index < 1:
                raise InvalidInput("lambda metric needs a 1-based eigenvalue index")
        elif self.index is not None:
            raise InvalidInput(f"metric {self.kind!r} takes no index")

    def eig_index(self, n: int) -> int:
        """Resolve the eigenvalue index against a concrete dimension."""
        i = n if self.kind == "lambda_min" else self.index
        if i is None:
            raise InvalidInput(f"metric {self.kind!r} has no eigenvalue index")
        if not 1 <= i <= n:
            raise IndexOutOfRange(f"eigenvalue index {i} outside 1..{n}")
        return i

    def __str__(self):
        if self.kind == "lambda":
            return f"lambda_{self.index}"
        return self.kind


TRACE = MetricId("trace")
LOGDET = MetricId("logdet")
NEG_TRACE_INV = MetricId("neg_trace_inv")
LAMBDA_MIN = MetricId("lambda_min")


def lambda_metric(i: int) -> MetricId:
    """Metric lambda_i: the i-th largest Gramian eigenvalue."""
    return MetricId("lambda", i)


def build_system(A, B) -> NetworkSystem:
    """Validate raw matrices into a NetworkSystem.

    No normalization is applied; shapes and finiteness are checked.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got shape {A.shape}")
    n = A.shape[0]
    if B.ndim != 2 or B.shape[0] != n:
        raise DimensionMismatch(f"B must have {n} rows, got shape {B.shape}")
    m = B.shape[1]
    if not 1 <= m <= n:
        raise DimensionMismatch(f"input count m={m} outside 1..{n}")
    if not np.isfinite(A).all() or not np.isfinite(B).all():
        raise NonFinite("A and B entries must be finite")
    return NetworkSystem(n, m, _readonly(A), _readonly(B))


def stability_info(A) -> tuple[float, bool]:
    """Spectral radius of A and whether rho(A) < 1."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0, True
    rho = float(np.abs(np.linalg.eigvals(A)).max())
    return rho, rho < 1.0


def _gramian_result(W, horizon) -> GramianResult:
    asym = np.linalg.norm(W - W.T)
    if asym > 1e-10 * (1.0 + np.linalg.norm(W)):
        raise NonFinite("accumulated Gramian lost symmetry beyond tolerance")
    Ws = 0.5 * (W + W.T)
    min_eig = float(np.linalg.eigvalsh(Ws)[0])
    return GramianResult(_readonly(Ws), horizon, min_eig)


def finite_gramian(sys: NetworkSystem, T: int | Horizon) -> GramianResult:
    """Reachability Gramian over T steps via the recursion G_{t+1} = A G_t."""
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    if not horizon.is_finite:
        raise InvalidInput("finite_gramian needs a finite horizon")
    W = np.zeros((sys.n, sys.n))
    G = np.array(sys.B)
    for _ in range(horizon.steps):
        W += G @ G.T
        G = sys.A @ G
    return _gramian_result(W, horizon)


def _smith_doubling(A, Q, rtol=1e-12, max_doublings=100):
    """Solve sum_{t>=0} A^t Q (A^t)^T by squared-Smith doubling.

    Each pass maps W <- W + A_k W A_k^T and A_k <- A_k^2, doubling the
    number of accumulated series terms.
    """
    W = np.array(Q, dtype=float)
    Ak = np.array(A, dtype=float)
    for _ in range(max_doublings):
        delta = Ak @ W @ Ak.T
        W = W + delta
        norm = np.linalg.norm(W)
        if np.linalg.norm(delta) <= rtol * (norm if norm > 0 else 1.0):
            break
        Ak = Ak @ Ak
    return 0.5 * (W + W.T)


def infinite_gramian(sys: NetworkSystem) -> GramianResult:
    """Solve A W A^T - W + B B^T = 0 for the infinite-horizon Gramian."""
    rho, _ = stability_info(sys.A)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableSystem(f"rho(A) = {rho:.6g}; infinite horizon needs rho(A) < 1")
    Q = sys.B @ sys.B.T
    W = _smith_doubling(sys.A, Q)
    residual = np.linalg.norm(sys.A @ W @ sys.A.T - W + Q)
    qnorm = np.linalg.norm(Q)
    if residual > 1e-10 * (qnorm if qnorm > 0 else 1.0):
        raise UnstableSystem(
            f"Lyapunov residual {residual:.3g} exceeds tolerance; system too close to instability"
        )
    return _gramian_result(W, Horizon.infinite())


def _eigh_descending(W):
    vals, vecs = np.linalg.eigh(W)
    return vals[::-1], vecs[:, ::-1]


def _require_invertible(g: GramianResult):
    threshold = SINGULARITY_RTOL * g.trace() / g.n
    if g.min_eig <= threshold:
        raise SingularGramian(
            f"min eigenvalue {g.min_eig:.3g} <= {threshold:.3g}; "
            "system not controllable at this horizon"
        )


def evaluate_metric(W: GramianResult, metric: MetricId) -> float:
    """Value of a Gramian performance metric.

    Trace and the eigenvalue metrics are defined for any PSD Gramian;
    log-det and -trace-inverse require invertibility and raise
    SingularGramian otherwise.  The log-det uses a Cholesky factor so it
    cannot overflow for large n.
    """
    M = W.W
    if metric.kind == "trace":
        return float(np.trace(M))
    if metric.kind in ("lambda", "lambda_min"):
        i = metric.eig_index(W.n)
        vals, _ = _eigh_descending(M)
        return float(vals[i - 1])
    _require_invertible(W)
    if metric.kind == "logdet":
        try:
            L = np.linalg.cholesky(M)
        except np.linalg.LinAlgError as exc:
            raise SingularGramian("Cholesky factorization failed") from exc
        return float(2.0 * np.sum(np.log(np.diag(L))))
    if metric.kind == "neg_trace_inv":
        vals = np.linalg.eigvalsh(M)
        return float(-np.sum(1.0 / vals))
    raise InvalidInput(f"unknown metric {metric}")


def control_energy(W: GramianResult, x_f) -> float:
    """Minimum input energy x_f^T W^{-1} x_f to reach x_f from the origin."""
    x = np.asarray(x_f, dtype=float).reshape(-1)
    if x.shape[0] != W.n:
        raise DimensionMismatch(f"target state has length {x.shape[0]}, expected {W.n}")
    _require_invertible(W)
    y = np.linalg.solve(W.W, x)
    return float(x @ y)
