import numpy as np
import pytest

from edgegram import (
    AsymmetricP,
    InvalidInput,
    LAMBDA_MIN,
    LOGDET,
    NEG_TRACE_INV,
    RepeatedEigenvalue,
    TRACE,
    build_system,
    fd_gradient_oracle,
    finite_gramian,
    lambda_metric,
    lyapunov_gradient,
    metric_gradient,
    theta_matrix,
    theta_matrix_literal,
)
from edgegram.experiments import six_node_family

ALL_METRICS = (TRACE, LOGDET, NEG_TRACE_INV, LAMBDA_MIN)


def random_system(seed, n=5, m=2, rho=0.7):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, (n, n))
    A *= rho / np.abs(np.linalg.eigvals(A)).max()
    return build_system(A, rng.uniform(-1, 1, (n, m)))


def random_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    P = rng.uniform(-1, 1, (n, n))
    return 0.5 * (P + P.T)


def rel_err(G, F):
    scale = np.abs(F).max()
    return np.abs(G - F).max() / (scale if scale > 0 else 1.0)


class TestThetaMatrix:
    def test_horizon_one_is_zero(self):
        sys = random_system(0, n=4)
        res = theta_matrix(sys, 1, random_symmetric(1, 4))
        assert np.all(res.total == 0.0)
        assert all(np.all(p == 0.0) for p in res.per_input)

    def test_matches_literal_double_sum(self):
        sys = random_system(2, n=4, m=2)
        P = random_symmetric(3, 4)
        fast = theta_matrix(sys, 6, P)
        literal = theta_matrix_literal(sys, 6, P)
        assert rel_err(fast.total, literal.total) <= 1e-10
        for a, b in zip(fast.per_input, literal.per_input):
            assert rel_err(a, b) <= 1e-10

    @pytest.mark.parametrize("seed", [10, 11, 12])
    def test_identity_weight_matches_trace_fd(self, seed):
        sys = random_system(seed, n=5, m=2)
        T = 6
        theta = theta_matrix(sys, T, np.eye(5))
        fd = fd_gradient_oracle(sys, T, TRACE)
        assert rel_err(2.0 * theta.total, fd.G) <= 1e-5

    def test_total_is_sum_of_inputs(self):
        sys = random_system(13, n=5, m=3)
        res = theta_matrix(sys, 8, random_symmetric(14, 5))
        assert rel_err(res.total, sum(res.per_input)) <= 1e-12

    def test_input_additivity_across_systems(self):
        sys = random_system(15, n=5, m=3)
        P = random_symmetric(16, 5)
        full = theta_matrix(sys, 7, P)
        per_column = sum(
            theta_matrix(build_system(sys.A, sys.B[:, [k]]), 7, P).total for k in range(3)
        )
        assert rel_err(full.total, per_column) <= 1e-12

    def test_linear_in_P(self):
        sys = random_system(17, n=4)
        P1, P2 = random_symmetric(18, 4), random_symmetric(19, 4)
        t1 = theta_matrix(sys, 6, P1).total
        t2 = theta_matrix(sys, 6, P2).total
        t12 = theta_matrix(sys, 6, P1 + P2).total
        assert rel_err(t12, t1 + t2) <= 1e-12

    def test_asymmetric_P_rejected(self):
        sys = random_system(20, n=3)
        P = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(AsymmetricP):
            theta_matrix(sys, 4, P)


class TestMetricGradient:
    def test_horizon_one_zero_gradient(self):
        # B chosen so B B^T is invertible with distinct eigenvalues
        sys = build_system(np.zeros((2, 2)), np.array([[1.0, 0.0], [1.0, 1.0]]))
        for metric in ALL_METRICS:
            assert np.all(metric_gradient(sys, 1, metric).G == 0.0)

    def test_fig3_trace_matches_fd(self):
        sys = six_node_family(2)
        G = metric_gradient(sys, 12, TRACE).G
        F = fd_gradient_oracle(sys, 12, TRACE).G
        assert rel_err(G, F) <= 1e-5

    def test_fig3_logdet_sparsity(self):
        # junction 2: first sub-diagonal plus 4th super-diagonal only
        sys = six_node_family(2)
        G = metric_gradient(sys, 12, LOGDET).G
        tol = 1e-12 * np.abs(G).max()
        nz = {(j + 1, i + 1) for j, i in zip(*np.nonzero(np.abs(G) > tol))}
        assert nz == {(j, i) for (j, i) in nz if j - i == 1 or i - j == 4}
        assert any(j - i == 1 for j, i in nz)
        assert any(i - j == 4 for j, i in nz)

    @pytest.mark.parametrize("metric", ALL_METRICS, ids=str)
    def test_matches_fd_oracle(self, metric):
        sys = random_system(30, n=5, m=3, rho=0.75)
        G = metric_gradient(sys, 9, metric).G
        F = fd_gradient_oracle(sys, 9, metric).G
        assert rel_err(G, F) <= 1e-5

    def test_lambda_i_gradient(self):
        sys = random_system(31, n=4, m=4)
        for i in (1, 2):
            G = metric_gradient(sys, 6, lambda_metric(i)).G
            F = fd_gradient_oracle(sys, 6, lambda_metric(i)).G
            assert rel_err(G, F) <= 1e-5

    def test_repeated_eigenvalue_rejected(self):
        sys = build_system(np.zeros((3, 3)), np.eye(3))  # W = T * I
        with pytest.raises(RepeatedEigenvalue):
            metric_gradient(sys, 4, LAMBDA_MIN)

    def test_directional_derivative(self):
        rng = np.random.default_rng(32)
        sys = random_system(33, n=6, m=3, rho=0.8)
        E = rng.uniform(-1, 1, (6, 6))
        eps = 1e-6
        for metric in ALL_METRICS:
            G = metric_gradient(sys, 10, metric).G
            analytic = float((G * E).sum())
            up = _metric_of(sys.A + eps * E, sys.B, 10, metric)
            dn = _metric_of(sys.A - eps * E, sys.B, 10, metric)
            numeric = (up - dn) / (2 * eps)
            assert analytic == pytest.approx(numeric, rel=1e-4)


def _metric_of(A, B, T, metric):
    from edgegram import evaluate_metric

    return evaluate_metric(finite_gramian(build_system(A, B), T), metric)


class TestFdOracle:
    def test_zero_dynamics_trace_structure(self):
        # at T=2, B=I: tr(W) = n + sum of squared weights, so off-diagonal
        # derivatives vanish at A = 0
        sys = build_system(np.zeros((3, 3)), np.eye(3))
        F = fd_gradient_oracle(sys, 2, TRACE, step=1e-6).G
        off = F - np.diag(np.diag(F))
        assert np.abs(off).max() <= 1e-9

    def test_step_validation(self):
        sys = random_system(40, n=3)
        with pytest.raises(InvalidInput):
            fd_gradient_oracle(sys, 4, TRACE, step=0.0)
        with pytest.raises(InvalidInput):
            fd_gradient_oracle(sys, 4, TRACE, step=1.0)


class TestLyapunovGradient:
    def test_zero_dynamics(self):
        sys = build_system(np.zeros((3, 3)), np.eye(3, 2))
        assert np.all(lyapunov_gradient(sys, (1, 2)) == 0.0)

    def test_scalar_closed_form(self):
        sys = build_system([[0.5]], [[1.0]])
        wdot = lyapunov_gradient(sys, (1, 1))
        assert wdot[0, 0] == pytest.approx(16.0 / 9.0, abs=1e-12)

    def test_horizon_limit_of_trace_gradient(self):
        sys = random_system(41, n=6, m=2, rho=0.8)
        theta = theta_matrix(sys, 400, np.eye(6))
        for edge in ((1, 2), (3, 5), (6, 4)):
            i, j = edge
            wdot = lyapunov_gradient(sys, edge)
            assert abs(2.0 * theta.total[j - 1, i - 1] - np.trace(wdot)) <= 1e-6
