import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgegram import (
    EdgeMod,
    FitDegenerate,
    IndexOutOfRange,
    InvalidInput,
    LOGDET,
    TRACE,
    apply_edge_mod,
    build_system,
    compute_ecm,
    ecm_guided_search,
    exhaustive_search,
    global_estimate,
)
from edgegram.ergen import ErConfig, generate_er_system
from edgegram.experiments import six_node_family


def random_system(seed, n=5, m=2, rho=0.7):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, (n, n))
    A *= rho / np.abs(np.linalg.eigvals(A)).max()
    return build_system(A, rng.uniform(-1, 1, (n, m)))


class TestApplyEdgeMod:
    def test_zero_weight_identical(self):
        sys = random_system(0)
        out = apply_edge_mod(sys, EdgeMod(1, 2, 0.0))
        assert np.array_equal(out.A, sys.A)

    def test_single_entry(self):
        sys = build_system(np.zeros((3, 3)), np.eye(3, 1))
        out = apply_edge_mod(sys, EdgeMod(1, 2, 0.7))
        expected = np.zeros((3, 3))
        expected[1, 0] = 0.7
        assert np.array_equal(out.A, expected)

    def test_source_never_mutated(self):
        sys = random_system(1)
        before = sys.A.copy()
        apply_edge_mod(sys, EdgeMod(2, 3, 1.5))
        assert np.array_equal(sys.A, before)

    def test_round_trip_from_zero(self):
        sys = build_system(np.zeros((3, 3)), np.eye(3, 1))
        mod = EdgeMod(1, 3, 0.7)
        back = apply_edge_mod(apply_edge_mod(sys, mod), mod.inverse())
        assert np.array_equal(back.A, sys.A)

    @given(
        w=st.floats(min_value=-4.0, max_value=4.0, allow_nan=False),
        i=st.integers(min_value=1, max_value=4),
        j=st.integers(min_value=1, max_value=4),
    )
    @settings(max_examples=60, deadline=None)
    def test_only_target_entry_changes(self, w, i, j):
        sys = random_system(2, n=4)
        out = apply_edge_mod(sys, EdgeMod(i, j, w))
        delta = out.A - sys.A
        assert delta[j - 1, i - 1] == pytest.approx(w, abs=1e-15)
        mask = np.ones((4, 4), dtype=bool)
        mask[j - 1, i - 1] = False
        assert np.array_equal(out.A[mask], sys.A[mask])

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            apply_edge_mod(random_system(3, n=3), EdgeMod(0, 2, 1.0))


class TestExhaustiveSearch:
    def test_two_node_candidate_count(self):
        sys = build_system(np.zeros((2, 2)), np.eye(2))
        report = exhaustive_search(sys, 3, TRACE, 0.5)
        assert len(report.table) == 2

    def test_tie_break_smallest_pair(self):
        sys = build_system(np.zeros((2, 2)), np.eye(2))
        report = exhaustive_search(sys, 3, TRACE, 0.5)
        # both candidates give the same value by symmetry
        assert report.best_edge == (1, 2)

    def test_matches_scalar_evaluation(self):
        from edgegram import evaluate_metric, finite_gramian

        sys = six_node_family(3)
        w = 0.9
        report = exhaustive_search(sys, 12, TRACE, w)
        for row in report.table[:8]:
            mod = apply_edge_mod(sys, EdgeMod(row.from_node, row.to_node, w))
            direct = evaluate_metric(finite_gramian(mod, 12), TRACE)
            assert row.f_value == pytest.approx(direct, rel=1e-12)

    def test_unstable_candidates_flagged_and_excluded(self):
        # ring with strong weights: increasing any ring edge destabilizes
        A = np.zeros((2, 2))
        A[1, 0] = 0.95
        A[0, 1] = 0.95
        sys = build_system(A, np.eye(2))
        report = exhaustive_search(sys, 6, TRACE, 0.5)
        assert all(not row.stable for row in report.table)
        assert report.f_best is None
        with_unstable = exhaustive_search(sys, 6, TRACE, 0.5, include_unstable=True)
        assert with_unstable.f_best is not None

    def test_singular_rows_recorded_not_raised(self):
        # w = -0.5 erases whichever line edge it lands on, breaking
        # controllability for exactly those candidates
        A = np.zeros((3, 3))
        A[1, 0] = 0.5
        A[2, 1] = 0.5
        sys = build_system(A, np.eye(3, 1))
        report = exhaustive_search(sys, 3, LOGDET, -0.5)
        by_edge = {(r.from_node, r.to_node): r for r in report.table}
        assert by_edge[(1, 2)].error == "SingularGramian"
        assert by_edge[(2, 3)].error == "SingularGramian"
        assert report.f_best is not None

    def test_deterministic(self):
        sys = random_system(4, n=6, m=2)
        r1 = exhaustive_search(sys, 8, TRACE, 0.3)
        r2 = exhaustive_search(sys, 8, TRACE, 0.3)
        assert [row.f_value for row in r1.table] == [row.f_value for row in r2.table]


class TestGuidedSearch:
    def test_full_k_attains_exhaustive_best(self):
        sys = random_system(5, n=5, m=2)
        full = exhaustive_search(sys, 8, TRACE, 0.2)
        guided = ecm_guided_search(sys, 8, TRACE, 0.2, k=20)
        assert guided.f_best == pytest.approx(full.f_best, rel=1e-12)

    def test_guided_never_exceeds_exhaustive(self):
        for seed in range(6, 12):
            sys = random_system(seed, n=5, m=2)
            full = exhaustive_search(sys, 8, TRACE, 0.2)
            guided = ecm_guided_search(sys, 8, TRACE, 0.2, k=3)
            assert guided.f_ecm <= full.f_best + 1e-12
            assert guided.f_best <= full.f_best + 1e-12

    def test_first_order_consistency_small_w(self):
        # as w -> 0 the best edge is the top signed-ECM edge
        hits = 0
        total = 0
        for seed in range(20):
            sys = random_system(100 + seed, n=5, m=2, rho=0.75)
            report = compute_ecm(sys, 8, TRACE)
            top_two = report.ranked_edges[:2]
            if top_two[0].value - top_two[1].value < 1e-6 * abs(top_two[0].value):
                continue  # no unique maximizer
            total += 1
            full = exhaustive_search(sys, 8, TRACE, 1e-4)
            if full.best_edge == (top_two[0].from_node, top_two[0].to_node):
                hits += 1
        assert total >= 15
        assert hits == total

    def test_k_validation(self):
        with pytest.raises(InvalidInput):
            ecm_guided_search(random_system(13), 6, TRACE, 0.1, k=0)


class TestGlobalEstimate:
    def test_degenerate_by_symmetry(self):
        # A = 0, B = I: every candidate edge is equivalent, one distinct h
        sys = build_system(np.zeros((4, 4)), np.eye(4))
        with pytest.raises(FitDegenerate):
            global_estimate(sys, 6, TRACE, 0.5, k=12)

    def test_finite_on_er_network(self):
        cfg = ErConfig(n=20, m=5, count=1, seed=42)
        sys = generate_er_system(cfg)
        est = global_estimate(sys, 20, TRACE, 0.5, k=20)
        assert np.isfinite(est.f_g)
        assert est.h_g >= max(h for h, _ in est.pairs)

    def test_monotone_estimate_dominates_observations(self):
        cfg = ErConfig(n=20, m=5, count=1, seed=43)
        sys = generate_er_system(cfg)
        est = global_estimate(sys, 20, TRACE, 0.4, k=20)
        if est.fit.method in ("rational33", "saturating11"):
            # monotone extrapolation beyond the hull cannot fall below the
            # pooled plateau by construction
            assert est.f_g >= np.mean([f for _, f in est.pairs]) - 1e-9

    def test_logdet_requires_trace_above_one(self):
        sys = build_system(np.zeros((3, 3)), 0.1 * np.eye(3))
        with pytest.raises(InvalidInput):
            global_estimate(sys, 4, LOGDET, 0.2, k=6)

    def test_metric_restriction(self):
        from edgegram import NEG_TRACE_INV

        with pytest.raises(InvalidInput):
            global_estimate(random_system(14), 6, NEG_TRACE_INV, 0.1)
