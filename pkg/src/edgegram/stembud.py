"""Directed stem-bud networks: construction, closed-form Gramian, ECM structure.

A stem-bud network chains nodes 1 -> 2 -> ... -> n and closes a cycle
(the bud) from node n back to the junction y, so the only structural
nonzeros of A are a_{i,i-1} for i = 2..n plus a_{yn}.  By the chain's
convention y = 0 denotes a pure line (no back edge, infinite bud length)
and y = 1 a pure ring.  Single-input Gramians of these networks are
diagonal, and the nonzero entries of any metric's edge centrality matrix
are confined to sub-diagonals {1 + i Lb} and super-diagonals {i Lb - 1}
determined by the bud length Lb = n - y + 1 alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidJunction, ZeroWeight
from .netmodel import NetworkSystem, build_system

__all__ = [
    "StemBudSpec",
    "DiagonalPattern",
    "build_stembud",
    "stembud_gramian_closed_form",
    "predicted_ecm_diagonals",
]


@dataclass(frozen=True)
class StemBudSpec:
    """Structural description of a stem-bud network.

    chain_weights[k] is a_{k+2, k+1}, the weight of edge (k+1) -> (k+2),
    for k = 0..n-2; back_weight is a_{yn} (ignored when y == 0).
    """

    n: int
    y: int
    chain_weights: tuple
    back_weight: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInput(f"stem-bud network needs n >= 2, got {self.n}")
        if not 0 <= self.y <= self.n - 1:
            raise InvalidJunction(f"junction y={self.y} outside 0..{self.n - 1}")
        w = tuple(float(v) for v in self.chain_weights)
        if len(w) != self.n - 1:
            raise InvalidInput(f"expected {self.n - 1} chain weights, got {len(w)}")
        if any(v == 0.0 for v in w):
            raise ZeroWeight("all chain weights a_{i,i-1} must be nonzero")
        if self.y >= 1 and self.back_weight == 0.0:
            raise ZeroWeight("back edge weight a_yn must be nonzero for y >= 1")
        object.__setattr__(self, "chain_weights", w)

    @property
    def bud_length(self) -> float:
        """Lb = n - y + 1, or infinity for the pure line (y = 0)."""
        return math.inf if self.y == 0 else self.n - self.y + 1

    @property
    def bud_contribution(self) -> float:
        """Product of weights around the bud cycle (0 for a line)."""
        if self.y == 0:
            return 0.0
        prod = self.back_weight
        for j in range(self.y + 1, self.n + 1):
            prod *= self.chain_weights[j - 2]
        return prod

    def chain_weight(self, i: int) -> float:
        """a_{i,i-1} for i in 2..n."""
        return self.chain_weights[i - 2]


@dataclass(frozen=True)
class DiagonalPattern:
    """Predicted sub/super-diagonal index sets of a stem-bud ECM."""

    k_sub: int
    k_sup: int
    N_sub: frozenset
    N_sup: frozenset


def build_stembud(spec: StemBudSpec, input_nodes, require_controllability: bool = False) -> NetworkSystem:
    """Adjacency and input matrices of a stem-bud network.

    input_nodes are 1-based; B gets one canonical column per node in
    ascending order.  Controllability with a single actuator needs the
    actuator at node 1, which is enforced only on request.
    """
    nodes = sorted(set(int(v) for v in input_nodes))
    if not nodes:
        raise InvalidInput("at least one input node required")
    if nodes[0] < 1 or nodes[-1] > spec.n:
        raise InvalidInput(f"input nodes {nodes} outside 1..{spec.n}")
    if require_controllability and 1 not in nodes:
        raise InvalidInput("controllability requires an actuator at node 1")
    n = spec.n
    A = np.zeros((n, n))
    for i in range(2, n + 1):
        A[i - 1, i - 2] = spec.chain_weight(i)
    if spec.y >= 1:
        A[spec.y - 1, n - 1] = spec.back_weight
    B = np.zeros((n, len(nodes)))
    for k, node in enumerate(nodes):
        B[node - 1, k] = 1.0
    return build_system(A, B)


def stembud_gramian_closed_form(spec: StemBudSpec, input_node: int, T: int) -> np.ndarray:
    """Diagonal of the T-step Gramian for a single input, in closed form.

    The impulse response visits one node per step; squaring and
    accumulating the visit values gives the diagonal directly.  Until the
    walk reaches node n the value is the running chain product; after the
    hop n -> y it cycles around the bud, gaining one factor of the bud
    contribution per full loop.  Implemented from those products (not
    from matrix powers) so it can serve as an independent oracle.
    """
    if not 1 <= input_node <= spec.n:
        raise InvalidInput(f"input node {input_node} outside 1..{spec.n}")
    if T < 1:
        raise InvalidInput("T must be >= 1")
    n, y, ib = spec.n, spec.y, input_node
    diag = np.zeros(n)
    lam = spec.bud_contribution
    Lb = 0 if y == 0 else n - y + 1
    # chain phase: t = 1 .. n - ib + 1, node p = ib + t - 1
    chain_prod = np.empty(n - ib + 1)
    chain_prod[0] = 1.0
    for t in range(2, n - ib + 2):
        chain_prod[t - 1] = chain_prod[t - 2] * spec.chain_weight(ib + t - 1)
    for t in range(1, min(T, n - ib + 1) + 1):
        p = ib + t - 1
        diag[p - 1] += chain_prod[t - 1] ** 2
    if y == 0 or T <= n - ib + 1:
        return diag
    # bud phase: after n - ib + 1 steps the walk sits at node n; the next
    # hop lands on y and every Lb steps close one loop
    base = spec.back_weight * chain_prod[-1]
    # partial products around the bud: y -> y+1 -> ... -> y+z
    bud_prod = np.empty(Lb)
    bud_prod[0] = 1.0
    for z in range(1, Lb):
        bud_prod[z] = bud_prod[z - 1] * spec.chain_weight(y + z)
    for t in range(n - ib + 2, T + 1):
        xi, zeta = divmod(t - (n - ib + 2), Lb)
        p = y + zeta
        v = base * lam**xi * bud_prod[zeta]
        diag[p - 1] += v * v
    return diag


def predicted_ecm_diagonals(n: int, L_b) -> DiagonalPattern:
    """Sub/super-diagonals that may carry nonzero ECM entries.

    k_sub = floor((n-2)/Lb) and k_sup = floor(n/Lb); the occupied sets
    are N_sub = {1 + i Lb : 0 <= i <= k_sub} and
    N_sup = {i Lb - 1 : 1 <= i <= k_sup}.  A line (Lb = inf) keeps only
    the first sub-diagonal; a ring (Lb = n) adds the (n-1)-th
    super-diagonal, matching the structure of its adjacency matrix.
    """
    if n < 2:
        raise InvalidInput(f"need n >= 2, got {n}")
    if L_b != math.inf:
        L_b = int(L_b)
        if L_b < 2:
            raise InvalidInput(f"bud length must be >= 2 or infinite, got {L_b}")
    if L_b == math.inf:
        return DiagonalPattern(0, 0, frozenset({1}), frozenset())
    k_sub = (n - 2) // L_b
    k_sup = n // L_b
    N_sub = frozenset(1 + i * L_b for i in range(k_sub + 1))
    N_sup = frozenset(i * L_b - 1 for i in range(1, k_sup + 1))
    return DiagonalPattern(k_sub, k_sup, N_sub, N_sup)
