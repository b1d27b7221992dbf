"""Monte-Carlo fuzz harness for the modification bounds.

Draws random systems, edges and weights satisfying each bound's stated
preconditions, evaluates both sides against exact Gramians, and records
(seed, bound name, lhs, rhs, slack) per trial.  A bound holds when its
slack is nonnegative up to roundoff; the harness counts violations and
can dump the full trial log as CSV.

Bound families: the two trace upper bounds, the two trace-inverse lower
bounds, the log-det upper bounds on both branch values of sigma, the
stability-interval interior (with the endpoint-tightness check for
nonnegative systems), the two appendix lemmas, and both parts of the
equal-weight stem-bud theorem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import (
    lambda1_rank_one_bound,
    logdet_upper_bounds,
    psd_norm_bounds,
    stability_weight_interval,
    stembud_equal_weight_analysis,
    trace_bounds,
    trinv_lower_bounds,
    x_constants,
)
from .fileio import write_records_csv
from .errors import SingularGramian
from .netmodel import LOGDET, NEG_TRACE_INV, build_system, evaluate_metric, finite_gramian, infinite_gramian
from .search import EdgeMod, apply_edge_mod
from .stembud import StemBudSpec, build_stembud

__all__ = ["FuzzTrial", "FuzzReport", "BOUND_FAMILIES", "run_bound_fuzz"]

# comparisons allow this much relative roundoff before counting a violation
SLACK_RTOL = 1e-9


@dataclass(frozen=True)
class FuzzTrial:
    seed_index: int
    bound: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def violated(self) -> bool:
        scale = max(abs(self.lhs), abs(self.rhs), 1.0)
        return self.lhs > self.rhs + SLACK_RTOL * scale


@dataclass(frozen=True)
class FuzzReport:
    trials: tuple
    violations: tuple

    def count(self, bound: str) -> int:
        return sum(1 for t in self.trials if t.bound == bound)

    def to_csv(self, path) -> None:
        write_records_csv(
            path,
            ("seed", "bound", "lhs", "rhs", "slack"),
            [(t.seed_index, t.bound, t.lhs, t.rhs, t.slack) for t in self.trials],
        )


def _random_system(rng, nonnegative=False, rho_max=0.9, m_min=1):
    """Random dense-ish system with rho(|A|) scaled into (0.3, rho_max)."""
    while True:
        n = int(rng.integers(3, 9))
        mask = rng.random((n, n)) < 0.6
        np.fill_diagonal(mask, False)
        A = np.where(mask, rng.uniform(-1.0, 1.0, (n, n)), 0.0)
        if nonnegative:
            A = np.abs(A)
        rho = np.abs(np.linalg.eigvals(np.abs(A))).max()
        if rho == 0.0:
            continue
        A *= rng.uniform(0.3, rho_max) / rho
        m = int(rng.integers(m_min, n + 1))
        B = rng.uniform(-1.0, 1.0, (n, m))
        if nonnegative:
            B = np.abs(B)
        return build_system(A, B)


def _admissible_draw(rng, sys):
    """Edge plus weight below the global alpha-admissible magnitude."""
    n = sys.n
    i = int(rng.integers(1, n + 1))
    j = int(rng.integers(1, n))
    if j >= i:
        j += 1
    c0 = x_constants(sys, 0.0)
    w_cap = 1.0 / c0.max_offdiag if c0.max_offdiag > 0 else 10.0
    w = float(rng.uniform(-0.95, 0.95)) * w_cap
    return (i, j), w


def _check_trace(rng, idx, out):
    sys = _random_system(rng)
    edge, w = _admissible_draw(rng, sys)
    rep = trace_bounds(sys, edge, w)
    T = int(rng.integers(sys.n, 3 * sys.n))
    tr_T = finite_gramian(sys, T).trace()
    tr_inf = infinite_gramian(sys).trace()
    out.append(FuzzTrial(idx, "trace_finite_le_infinite", tr_T, tr_inf))
    out.append(FuzzTrial(idx, "trace_unmodified", tr_inf, rep.unmodified_bound))
    modified = apply_edge_mod(sys, EdgeMod(edge[0], edge[1], w))
    tr_mod = infinite_gramian(modified).trace()
    out.append(FuzzTrial(idx, "trace_modified", tr_mod, rep.modified_bound))


def _check_trinv(rng, idx, out):
    sys = _random_system(rng, m_min=2)
    edge, w = _admissible_draw(rng, sys)
    rep = trinv_lower_bounds(sys, edge, w)
    try:
        tr_inv = -evaluate_metric(infinite_gramian(sys), NEG_TRACE_INV)
        modified = apply_edge_mod(sys, EdgeMod(edge[0], edge[1], w))
        tr_inv_mod = -evaluate_metric(infinite_gramian(modified), NEG_TRACE_INV)
    except SingularGramian:
        return  # (numerically) uncontrollable draw; the bound is vacuous
    out.append(FuzzTrial(idx, "trinv_unmodified", rep.unmodified_bound, tr_inv))
    out.append(FuzzTrial(idx, "trinv_modified", rep.modified_bound, tr_inv_mod))


def _check_logdet(rng, idx, out, sigma_branch):
    sys = _random_system(rng, m_min=2)
    T = 2 * sys.n
    if sigma_branch == 1:
        # shrink B so the Gramian trace drops below 1
        tr = finite_gramian(sys, T).trace()
        sys = build_system(sys.A, sys.B * float(rng.uniform(0.3, 0.9)) / np.sqrt(tr))
    edge, w = _admissible_draw(rng, sys)
    rep = logdet_upper_bounds(sys, edge, w, T)
    W = finite_gramian(sys, T)
    if W.min_eig <= 1e-12 * W.trace() / sys.n:
        return  # uncontrollable draw; log-det undefined and the bound vacuous
    ld = evaluate_metric(W, LOGDET)
    out.append(FuzzTrial(idx, f"logdet_unmodified_sigma{rep.sigma}", ld, rep.unmodified_bound))
    modified = apply_edge_mod(sys, EdgeMod(edge[0], edge[1], w))
    Wm = finite_gramian(modified, T)
    if Wm.min_eig > 1e-12 * Wm.trace() / sys.n:
        ld_mod = evaluate_metric(Wm, LOGDET)
        out.append(
            FuzzTrial(idx, f"logdet_modified_sigma{rep.sigma_modified}", ld_mod, rep.modified_bound)
        )


def _check_interval(rng, idx, out):
    sys = _random_system(rng, nonnegative=bool(rng.integers(0, 2)))
    n = sys.n
    i = int(rng.integers(1, n + 1))
    j = int(rng.integers(1, n))
    if j >= i:
        j += 1
    interval = stability_weight_interval(sys, (i, j))
    if interval.bounded:
        w = float(rng.uniform(-0.999, 0.999)) * interval.upper
    else:
        w = float(rng.uniform(-1e6, 1e6))
    modified = apply_edge_mod(sys, EdgeMod(i, j, w))
    rho = float(np.abs(np.linalg.eigvals(modified.A)).max())
    out.append(FuzzTrial(idx, "stability_interval_interior", rho, 1.0))
    # tightness holds for nonnegative systems: just past the endpoint the
    # spectral radius reaches 1
    nn = _random_system(rng, nonnegative=True)
    i = int(rng.integers(1, nn.n + 1))
    j = int(rng.integers(1, nn.n))
    if j >= i:
        j += 1
    nn_interval = stability_weight_interval(nn, (i, j))
    if nn_interval.bounded:
        beyond = apply_edge_mod(nn, EdgeMod(i, j, 1.001 * nn_interval.upper))
        rho_beyond = float(np.abs(np.linalg.eigvals(beyond.A)).max())
        out.append(FuzzTrial(idx, "stability_interval_tightness", 1.0 - 1e-6, rho_beyond))


def _check_lemma_rank_one(rng, idx, out):
    n = int(rng.integers(2, 9))
    i = int(rng.integers(1, n + 1))
    if rng.integers(0, 4) == 0:
        v = np.zeros(n)
        v[i - 1] = float(rng.uniform(0.1, 2.0))  # rank-one case, positive weight
    else:
        v = rng.uniform(-1.0, 1.0, n)
        if np.linalg.norm(v) == 0.0:
            return
    bound = lambda1_rank_one_bound(v, i)
    e = np.zeros(n)
    e[i - 1] = 1.0
    U = np.outer(v, e) + np.outer(e, v)
    lam1 = float(np.linalg.eigvalsh(U)[-1])
    out.append(FuzzTrial(idx, "lemma_rank_one", lam1, bound))


def _check_lemma_psd_norm(rng, idx, out):
    n = int(rng.integers(2, 9))
    G = rng.uniform(-1.0, 1.0, (n, n))
    Z = G @ G.T + float(rng.uniform(0.01, 0.5)) * np.eye(n)
    lam1 = float(np.linalg.eigvalsh(Z)[-1])
    lam_tilde = lam1 * float(rng.uniform(1.0, 3.0))
    lower, upper = psd_norm_bounds(Z, lam_tilde)
    fro2 = float((Z * Z).sum())
    out.append(FuzzTrial(idx, "lemma_psd_norm_lower", lower, fro2))
    out.append(FuzzTrial(idx, "lemma_psd_norm_upper", fro2, upper))


def _check_equal_weight(rng, idx, out):
    n = int(rng.integers(3, 9))
    y = int(rng.integers(1, n))
    a = float(rng.uniform(0.05, 0.95))
    bud_bound, trace_cap = stembud_equal_weight_analysis(a, n, y)
    spec = StemBudSpec(n, y, (a,) * (n - 1), a)
    sys = build_stembud(spec, (1,))
    # (i) a single bud edge modified by w below the bound stays stable
    bud_edges = [(k, k + 1) for k in range(y, n)] + [(n, y)]
    i, j = bud_edges[int(rng.integers(0, len(bud_edges)))]
    w = float(rng.uniform(0.0, 0.999)) * bud_bound
    modified = apply_edge_mod(sys, EdgeMod(i, j, w))
    rho = float(np.abs(np.linalg.eigvals(modified.A)).max())
    out.append(FuzzTrial(idx, "equal_weight_stability", rho, 1.0))
    # (ii) the Gramian trace never exceeds the closed-form cap
    tr = infinite_gramian(sys).trace()
    out.append(FuzzTrial(idx, "equal_weight_trace", tr, trace_cap))


def run_bound_fuzz(trials_per_family: int = 1000, seed: int = 0, out_csv=None) -> FuzzReport:
    """Run every bound family and collect the trial log."""
    families = (
        ("trace", _check_trace),
        ("trinv", _check_trinv),
        ("logdet_sigma1", lambda r, i, o: _check_logdet(r, i, o, 1)),
        ("logdet_sigma2", lambda r, i, o: _check_logdet(r, i, o, 2)),
        ("interval", _check_interval),
        ("lemma_rank_one", _check_lemma_rank_one),
        ("lemma_psd_norm", _check_lemma_psd_norm),
        ("equal_weight", _check_equal_weight),
    )
    trials = []
    root = np.random.SeedSequence(seed)
    streams = root.spawn(len(families))
    for (name, check), stream in zip(families, streams):
        rng = np.random.default_rng(stream)
        for idx in range(trials_per_family):
            check(rng, idx, trials)
    report = FuzzReport(tuple(trials), tuple(t for t in trials if t.violated))
    if out_csv is not None:
        report.to_csv(out_csv)
    return report


BOUND_FAMILIES = (
    "trace_finite_le_infinite",
    "trace_unmodified",
    "trace_modified",
    "trinv_unmodified",
    "trinv_modified",
    "logdet_unmodified_sigma1",
    "logdet_unmodified_sigma2",
    "logdet_modified_sigma1",
    "logdet_modified_sigma2",
    "stability_interval_interior",
    "stability_interval_tightness",
    "lemma_rank_one",
    "lemma_psd_norm_lower",
    "lemma_psd_norm_upper",
    "equal_weight_stability",
    "equal_weight_trace",
)
