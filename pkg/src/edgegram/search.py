"""Single-edge modification search and the bound-based global estimate.

Exhaustive search sweeps all n(n-1) off-diagonal single-edge additions of
a fixed weight w, evaluating the finite-horizon metric for each (defined
regardless of stability) and flagging candidates whose modified adjacency
is unstable; the best value is taken over stable candidates by default.
ECM-guided search evaluates only the top-k edges of the centrality
ranking.  The global estimate extrapolates the metric value at the
edge-independent worst-case bound from the (value, bound) pairs of the
top-k edges.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bounds import x_constants
from .ecm import EcmReport, compute_ecm
from .errors import IndexOutOfRange, InvalidInput, SingularGramian
from .fitting import FitResult, fit_and_evaluate
from .gradient import metric_weight_matrix
from .netmodel import (
    Horizon,
    MetricId,
    NetworkSystem,
    build_system,
    evaluate_metric,
    finite_gramian,
)

__all__ = [
    "EdgeMod",
    "EdgeEvaluation",
    "SearchReport",
    "GlobalEstimate",
    "apply_edge_mod",
    "exhaustive_search",
    "ecm_guided_search",
    "global_estimate",
]


@dataclass(frozen=True)
class EdgeMod:
    """Additive weight change w on edge from_node -> to_node."""

    from_node: int
    to_node: int
    w: float

    def inverse(self) -> "EdgeMod":
        return EdgeMod(self.from_node, self.to_node, -self.w)


@dataclass(frozen=True)
class EdgeEvaluation:
    """One row of a search table."""

    from_node: int
    to_node: int
    f_value: float | None
    stable: bool
    error: str | None = None


@dataclass(frozen=True)
class SearchReport:
    """Outcome of a single-edge search at fixed metric, horizon and w."""

    metric: MetricId
    T: Horizon
    w: float
    f_initial: float
    table: tuple
    f_best: float | None
    best_edge: tuple | None
    f_ecm: float | None = None
    ecm_edge: tuple | None = None
    include_unstable: bool = False
    elapsed_seconds: float = 0.0


@dataclass(frozen=True)
class GlobalEstimate:
    """Curve-fit estimate of the global optimum from top-k bound pairs."""

    metric: MetricId
    w: float
    f_g: float
    h_g: float
    fit: FitResult
    pairs: tuple


def apply_edge_mod(sys: NetworkSystem, mod: EdgeMod) -> NetworkSystem:
    """New system with mod.w added to exactly one adjacency entry.

    Pure: the input system is never mutated, so the pre-modification
    matrix stays available bit-exactly.
    """
    i, j = mod.from_node, mod.to_node
    if not (1 <= i <= sys.n and 1 <= j <= sys.n):
        raise IndexOutOfRange(f"edge ({i},{j}) outside 1..{sys.n}")
    A = np.array(sys.A)
    A[j - 1, i - 1] += mod.w
    return build_system(A, sys.B)


def _candidate_edges(n: int):
    return [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]


def _chunk_gramians(sys, ii, jj, T, w, need_full):
    """Gramians (or just traces) of a chunk of modified systems.

    One propagation step is a shared matrix product plus a rank-one
    correction per edge, so the whole chunk advances together.
    """
    n, m = sys.n, sys.m
    E = ii.shape[0]
    rows = np.arange(E)
    G = np.broadcast_to(sys.B, (E, n, m)).copy()
    if need_full:
        W = np.zeros((E, n, n))
    else:
        tr = np.zeros(E)
    for _ in range(T):
        if need_full:
            W += np.matmul(G, G.transpose(0, 2, 1))
        else:
            tr += (G * G).sum(axis=(1, 2))
        AG = np.matmul(sys.A, G)
        AG[rows, jj, :] += w * G[rows, ii, :]
        G = AG
    if need_full:
        return 0.5 * (W + W.transpose(0, 2, 1))
    return tr


def _batched_metric_values(sys, edges, T, w, metric):
    """Metric value and stability flag per candidate edge, vectorized.

    Candidates are processed in fixed-size chunks in edge-list order, so
    results are deterministic and memory stays bounded for large n.
    """
    n = sys.n
    E = len(edges)
    ii = np.fromiter((e[0] - 1 for e in edges), dtype=int, count=E)
    jj = np.fromiter((e[1] - 1 for e in edges), dtype=int, count=E)
    values = np.full(E, np.nan)
    stable = np.empty(E, dtype=bool)
    errors = [None] * E
    need_full = metric.kind != "trace"
    chunk = max(16, int(2e6 // (n * n)))
    for start in range(0, E, chunk):
        sl = slice(start, min(start + chunk, E))
        ci, cj = ii[sl], jj[sl]
        rows = np.arange(ci.shape[0])
        Amods = np.broadcast_to(sys.A, (ci.shape[0], n, n)).copy()
        Amods[rows, cj, ci] += w
        stable[sl] = np.abs(np.linalg.eigvals(Amods)).max(axis=1) < 1.0
        if not need_full:
            values[sl] = _chunk_gramians(sys, ci, cj, T, w, False)
            continue
        W = _chunk_gramians(sys, ci, cj, T, w, True)
        eigs = np.linalg.eigvalsh(W)  # ascending
        if metric.kind in ("lambda", "lambda_min"):
            idx = metric.eig_index(n)
            values[sl] = eigs[:, n - idx]
            continue
        tr = np.trace(W, axis1=1, axis2=2)
        singular = eigs[:, 0] <= 1e-12 * tr / n
        if metric.kind == "logdet":
            with np.errstate(invalid="ignore", divide="ignore"):
                v = np.sum(np.log(np.where(eigs > 0, eigs, np.nan)), axis=1)
        else:  # neg_trace_inv
            with np.errstate(divide="ignore"):
                v = -np.sum(1.0 / eigs, axis=1)
        v[singular] = np.nan
        values[sl] = v
        for q in np.nonzero(singular)[0]:
            errors[start + q] = "SingularGramian"
    return values, stable, errors


def _assemble_report(sys, metric, horizon, w, edges, values, stable, errors,
                     include_unstable, f_initial, f_ecm, ecm_edge, t0):
    table = []
    f_best = None
    best_edge = None
    for q, (i, j) in enumerate(edges):
        v = None if errors[q] is not None or not np.isfinite(values[q]) else float(values[q])
        table.append(EdgeEvaluation(i, j, v, bool(stable[q]), errors[q]))
        if v is None or (not include_unstable and not stable[q]):
            continue
        if f_best is None or v > f_best:
            f_best, best_edge = v, (i, j)
    return SearchReport(
        metric,
        horizon,
        float(w),
        f_initial,
        tuple(table),
        f_best,
        best_edge,
        f_ecm=f_ecm,
        ecm_edge=ecm_edge,
        include_unstable=include_unstable,
        elapsed_seconds=time.perf_counter() - t0,
    )


def exhaustive_search(
    sys: NetworkSystem,
    T: int | Horizon,
    metric: MetricId,
    w: float,
    include_unstable: bool = False,
    include_self_loops: bool = False,
) -> SearchReport:
    """Evaluate the metric after adding w to every candidate edge.

    Self-loops are excluded by default.  Per-edge singular Gramians are
    recorded in the table instead of aborting the sweep.  f_best is the
    maximum over stable candidates (over all evaluated candidates when
    include_unstable is set), ties resolved toward the smallest (i, j).
    """
    t0 = time.perf_counter()
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    if not horizon.is_finite:
        raise InvalidInput("search requires a finite horizon")
    f_initial = evaluate_metric(finite_gramian(sys, horizon), metric)
    edges = _candidate_edges(sys.n)
    if include_self_loops:
        edges = edges + [(i, i) for i in range(1, sys.n + 1)]
        edges.sort()
    values, stable, errors = _batched_metric_values(sys, edges, horizon.steps, w, metric)
    return _assemble_report(
        sys, metric, horizon, w, edges, values, stable, errors,
        include_unstable, f_initial, None, None, t0,
    )


def ecm_guided_search(
    sys: NetworkSystem,
    T: int | Horizon,
    metric: MetricId,
    w: float,
    k: int,
    ecm_report: EcmReport | None = None,
    include_unstable: bool = False,
) -> SearchReport:
    """Evaluate the metric only on the k best-ranked ECM edges.

    The ECM is computed once (or supplied); f_ecm is the value at the
    top-1 edge and f_best the maximum over the k evaluations.
    """
    t0 = time.perf_counter()
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    if not horizon.is_finite:
        raise InvalidInput("search requires a finite horizon")
    if k < 1:
        raise InvalidInput(f"top-k count must be >= 1, got {k}")
    if ecm_report is None:
        ecm_report = compute_ecm(sys, horizon, metric)
    f_initial = evaluate_metric(finite_gramian(sys, horizon), metric)
    ranked = ecm_report.ranked_edges[:k]
    edges = [(e.from_node, e.to_node) for e in ranked]
    values, stable, errors = _batched_metric_values(sys, edges, horizon.steps, w, metric)
    top = edges[0]
    f_ecm = None
    if errors[0] is None and np.isfinite(values[0]):
        f_ecm = float(values[0])
    return _assemble_report(
        sys, metric, horizon, w, edges, values, stable, errors,
        include_unstable, f_initial, f_ecm, top, t0,
    )


def _h_of_modified(sys, i, j, w):
    """tr(H_Y) of the modified network: Y = (I - |A + w e_j e_i^T|)^{-1}."""
    absA = np.abs(sys.A).copy()
    absA[j - 1, i - 1] = abs(sys.A[j - 1, i - 1] + w)
    Y = np.linalg.solve(np.eye(sys.n) - absA, np.eye(sys.n))
    YB = Y @ np.abs(sys.B)
    return float((YB * YB).sum())


def global_estimate(
    sys: NetworkSystem,
    T: int | Horizon,
    metric: MetricId,
    w: float,
    k: int = 30,
    ecm_report: EcmReport | None = None,
    guided: SearchReport | None = None,
) -> GlobalEstimate:
    """Estimate the best attainable metric value over all single edges.

    Pairs (f, h) are collected from the k top-ECM edges, f being the
    modified metric value and h its trace bound tr(H_Y) (mapped through
    2 n log(. / sqrt(n)) for log-det, the sigma = 2 branch); a curve
    fitted to the pairs is evaluated at the edge-independent bound h_g
    built from the global constants alpha, beta, gamma, gamma_bar.
    """
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    if metric.kind not in ("trace", "logdet"):
        raise InvalidInput("global estimate supports the trace and logdet metrics")
    c = x_constants(sys, w)
    h_g_trace = (1.0 + c.alpha * c.beta) * c.trHX + c.alpha**2 * c.gamma * c.gamma_bar
    if guided is None:
        guided = ecm_guided_search(sys, horizon, metric, w, k, ecm_report=ecm_report)
    n = sys.n
    if metric.kind == "logdet":
        trW = finite_gramian(sys, horizon).trace()
        if trW <= 1.0:
            raise InvalidInput(
                f"log-det estimate uses the sigma=2 branch and needs tr(W) > 1, got {trW:.6g}"
            )
        h_g = 2.0 * n * math.log(h_g_trace / math.sqrt(n))
    else:
        h_g = h_g_trace
    fbar, hbar = [], []
    for row in guided.table:
        if row.f_value is None:
            continue
        h = _h_of_modified(sys, row.from_node, row.to_node, w)
        if metric.kind == "logdet":
            h = 2.0 * n * math.log(h / math.sqrt(n))
        fbar.append(row.f_value)
        hbar.append(h)
    fit = fit_and_evaluate(np.array(hbar), np.array(fbar), h_g)
    return GlobalEstimate(
        metric, float(w), fit.value, float(h_g), fit, tuple(zip(hbar, fbar))
    )
