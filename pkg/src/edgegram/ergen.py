"""Seeded random network generation (directed Erdos-Renyi ensembles).

Each ordered pair i != j receives an edge independently with probability
p; weights are uniform(0, 1); the whole matrix is rescaled by one factor
so the spectral radius hits a uniform draw from the target interval; the
input nodes are sampled without replacement.  Everything is driven by a
single seed, and ensemble members get independent child streams, so a
campaign is bit-reproducible regardless of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGraph, InvalidInput
from .netmodel import NetworkSystem, build_system

__all__ = ["ErConfig", "generate_er_system", "er_ensemble"]

MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class ErConfig:
    """Parameters of a seeded ER ensemble."""

    n: int = 30
    m: int = 8
    edge_probability: float = 0.35
    rho_interval: tuple = (0.85, 0.90)
    weight_distribution: str = "uniform01"
    count: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInput(f"need n >= 2, got {self.n}")
        if not 1 <= self.m <= self.n:
            raise InvalidInput(f"input count m={self.m} outside 1..{self.n}")
        if not 0.0 < self.edge_probability <= 1.0:
            raise InvalidInput(f"edge probability {self.edge_probability} outside (0, 1]")
        lo, hi = self.rho_interval
        if not 0.0 < lo < hi < 1.0:
            raise InvalidInput(f"rho interval {self.rho_interval} must satisfy 0 < lo < hi < 1")
        if self.weight_distribution != "uniform01":
            raise InvalidInput(f"unknown weight distribution {self.weight_distribution!r}")
        if self.count < 1:
            raise InvalidInput(f"count must be >= 1, got {self.count}")


def generate_er_system(cfg: ErConfig, rng=None) -> NetworkSystem:
    """One random network from the configuration.

    Draw order is fixed (edge mask, weights, target radius, input nodes)
    so a given stream always yields the same system.  Draws whose graph
    is empty or nilpotent (zero spectral radius, so no rescaling can hit
    the target) are regenerated.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n, m = cfg.n, cfg.m
    lo, hi = cfg.rho_interval
    for _ in range(MAX_ATTEMPTS):
        mask = rng.random((n, n)) < cfg.edge_probability
        np.fill_diagonal(mask, False)
        weights = rng.random((n, n))
        target = rng.uniform(lo, hi)
        inputs = np.sort(rng.choice(n, size=m, replace=False))
        if not mask.any():
            continue
        A = np.where(mask, weights, 0.0)
        rho = float(np.abs(np.linalg.eigvals(A)).max())
        if rho == 0.0:
            continue
        A *= target / rho
        B = np.zeros((n, m))
        B[inputs, np.arange(m)] = 1.0
        return build_system(A, B)
    raise DegenerateGraph(f"no usable graph after {MAX_ATTEMPTS} attempts")


def er_ensemble(cfg: ErConfig) -> list:
    """All cfg.count networks, each from an independent child stream."""
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.count)
    return [generate_er_system(cfg, np.random.default_rng(s)) for s in streams]
