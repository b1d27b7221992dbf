"""Edge centrality matrix assembly, ranking, and sparsity extraction.

The ECM for a metric is the Theta matrix built with that metric's weight
matrix P; entry (j, i) scores edge i -> j, existing or not, by half the
first-order change of the metric per unit of added weight.  The ECM is
additive over inputs, so any subset of actuators has a well-defined
contribution (with P always taken from the full-input Gramian).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyCandidateSet, InvalidInput
from .gradient import ThetaResult, metric_weight_matrix, theta_matrix
from .netmodel import Horizon, MetricId, NetworkSystem, _readonly

__all__ = [
    "RankedEdge",
    "EcmReport",
    "SparsityPattern",
    "compute_ecm",
    "rank_edges",
    "sparsity_pattern",
]

SPARSITY_TOL = 1e-10


@dataclass(frozen=True)
class RankedEdge:
    """One ranking entry: edge from_node -> to_node with its ECM value.

    weight_sign is the recommended sign of the modification weight: +1 in
    signed mode (which presumes w > 0), sign(value) in absolute mode.
    """

    from_node: int
    to_node: int
    value: float
    weight_sign: int = 1

    def astuple(self):
        return (self.from_node, self.to_node, self.value)


@dataclass(frozen=True)
class EcmReport:
    """ECM for a metric plus the default ranking of candidate edges."""

    theta: ThetaResult
    metric: MetricId
    ranked_edges: tuple
    input_subset: tuple
    exclude_self_loops: bool = True
    existing_edge_policy: str = "include"
    rank_mode: str = "signed"

    @property
    def total(self) -> np.ndarray:
        return self.theta.total

    def top_edge(self) -> RankedEdge:
        return self.ranked_edges[0]


@dataclass(frozen=True)
class SparsityPattern:
    """Positions (row, col) above threshold and the diagonals they occupy."""

    positions: frozenset
    sub_diagonals: frozenset
    super_diagonals: frozenset
    has_main_diagonal: bool


def compute_ecm(sys: NetworkSystem, T, metric: MetricId, input_subset=None) -> EcmReport:
    """ECM of a metric restricted to a subset of inputs (default: all).

    P comes from the full-input Gramian, so reports for disjoint subsets
    add up exactly to the full report; the full-set total equals half the
    metric gradient.
    """
    if input_subset is None:
        subset = tuple(range(1, sys.m + 1))
    else:
        subset = tuple(sorted(set(int(k) for k in input_subset)))
        if not subset:
            raise InvalidInput("input_subset must be nonempty")
        if subset[0] < 1 or subset[-1] > sys.m:
            raise InvalidInput(f"input indices {subset} outside 1..{sys.m}")
    horizon = T if isinstance(T, Horizon) else Horizon.finite(T)
    P, _ = metric_weight_matrix(sys, horizon, metric)
    full = theta_matrix(sys, horizon, P)
    total = np.zeros((sys.n, sys.n))
    for k in subset:
        total += full.per_input[k - 1]
    theta = ThetaResult(
        tuple(full.per_input[k - 1] for k in subset), _readonly(total), full.P_used, horizon
    )
    report = EcmReport(theta, metric, (), subset)
    try:
        ranked = tuple(rank_edges(report))
    except EmptyCandidateSet:
        ranked = ()  # single-node system: no off-diagonal candidates
    return EcmReport(theta, metric, ranked, subset)


def rank_edges(
    report: EcmReport,
    exclude_self_loops: bool = True,
    existing_edge_policy: str = "include",
    mode: str = "signed",
    sys: NetworkSystem | None = None,
) -> list:
    """Order candidate edges by ECM value.

    Signed mode sorts by Theta[j,i] descending, appropriate when
    maximizing the metric with w > 0 (first-order gain is 2 w Theta);
    absolute mode sorts by |Theta[j,i]| and records sign(Theta) as the
    recommended weight sign.  Ties break toward the smallest (from, to)
    pair.  The existing-edge filter needs the system's adjacency; an edge
    exists iff its weight is exactly nonzero.
    """
    if existing_edge_policy not in ("include", "only_new", "only_existing"):
        raise InvalidInput(f"unknown existing_edge_policy {existing_edge_policy!r}")
    if mode not in ("signed", "absolute"):
        raise InvalidInput(f"unknown rank mode {mode!r}")
    if existing_edge_policy != "include" and sys is None:
        raise InvalidInput("existing-edge filtering requires the system")
    total = report.total
    n = total.shape[0]
    entries = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if exclude_self_loops and i == j:
                continue
            if existing_edge_policy != "include":
                exists = sys.A[j - 1, i - 1] != 0.0
                if existing_edge_policy == "only_new" and exists:
                    continue
                if existing_edge_policy == "only_existing" and not exists:
                    continue
            v = float(total[j - 1, i - 1])
            entries.append((i, j, v))
    if not entries:
        raise EmptyCandidateSet("edge filters removed every candidate")
    if mode == "signed":
        entries.sort(key=lambda e: (-e[2], e[0], e[1]))
        return [RankedEdge(i, j, v, 1) for i, j, v in entries]
    entries.sort(key=lambda e: (-abs(e[2]), e[0], e[1]))
    return [RankedEdge(i, j, v, -1 if v < 0 else 1) for i, j, v in entries]


def sparsity_pattern(theta, tol: float = SPARSITY_TOL) -> SparsityPattern:
    """Positions of entries exceeding tol relative to the largest magnitude.

    Positions are 1-based (row, col); a position on row j, column i sits
    on sub-diagonal j - i (if j > i) or super-diagonal i - j (if i > j).
    """
    if not 0.0 < tol < 1.0:
        raise InvalidInput(f"tol must be in (0, 1), got {tol}")
    M = np.asarray(theta, dtype=float)
    scale = np.abs(M).max() if M.size else 0.0
    if scale == 0.0:
        return SparsityPattern(frozenset(), frozenset(), frozenset(), False)
    rows, cols = np.nonzero(np.abs(M) > tol * scale)
    positions = frozenset((int(r) + 1, int(c) + 1) for r, c in zip(rows, cols))
    sub = frozenset(r - c for r, c in positions if r > c)
    sup = frozenset(c - r for r, c in positions if c > r)
    main = any(r == c for r, c in positions)
    return SparsityPattern(positions, sub, sup, main)
