import numpy as np
import pytest

from trljsym.cg import CGConfig, CGError, cg_solve, default_cg_config
from trljsym.operators import DenseOperator


def hpd_matrix(n, seed):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return b @ b.conj().T + n * np.eye(n)


class TestCGConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            CGConfig(tol=0.0)
        with pytest.raises(ValueError):
            CGConfig(tol=1.5)
        with pytest.raises(ValueError):
            CGConfig(maxiter=0)

    def test_default_scales_with_eigensolver_tol(self):
        assert default_cg_config(1e-13).tol == 1e-14
        assert default_cg_config(1e-6).tol == 1e-14
        assert default_cg_config(1e-16).tol == 1e-16 / 10.0


class TestCGSolve:
    def test_identity_one_iteration(self):
        op = DenseOperator(np.eye(4))
        b = np.array([1.0, 2.0, -1.0, 0.5], dtype=complex)
        x, report = cg_solve(op, b)
        assert report.converged
        assert report.iterations == 1
        assert np.allclose(x, b, atol=1e-14)

    def test_diagonal_exact_termination(self):
        op = DenseOperator(np.diag([1.0, 2.0, 4.0]))
        x, report = cg_solve(op, np.array([1.0, 2.0, 4.0]))
        assert report.converged
        assert report.iterations <= 3
        assert np.allclose(x, [1.0, 1.0, 1.0], atol=1e-12)

    def test_matches_direct_solve(self):
        a = hpd_matrix(100, 1)
        op = DenseOperator(a)
        rng = np.random.default_rng(2)
        b = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        x, report = cg_solve(op, b, CGConfig(tol=1e-14))
        x_direct = np.linalg.solve(a, b)
        assert report.converged
        assert np.linalg.norm(x - x_direct) / np.linalg.norm(x_direct) <= 1e-10

    def test_distinct_eigenvalue_termination(self):
        # d distinct eigenvalues: converges to 1e-12 within d + 2 iterations
        for diag in ([1.0, 5.0, 9.0], [2.0, 2.0, 7.0, 7.0, 7.0, 11.0]):
            d = len(set(diag))
            op = DenseOperator(np.diag(diag))
            rng = np.random.default_rng(4)
            b = rng.standard_normal(len(diag)) + 0j
            _, report = cg_solve(op, b, CGConfig(tol=1e-12))
            assert report.converged
            assert report.iterations <= d + 2

    def test_error_anorm_monotone(self):
        a = hpd_matrix(20, 3)
        op = DenseOperator(a)
        rng = np.random.default_rng(5)
        b = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        exact = np.linalg.solve(a, b)
        errs = []

        def track(_k, xk):
            e = xk - exact
            errs.append(float(np.real(np.vdot(e, a @ e))))

        cg_solve(op, b, CGConfig(tol=1e-14), callback=track)
        assert len(errs) > 2
        for prev, cur in zip(errs, errs[1:]):
            assert cur <= prev * (1 + 1e-12)

    def test_nonconvergence_reports(self):
        a = hpd_matrix(50, 7)
        op = DenseOperator(a)
        b = np.ones(50, dtype=complex)
        x, report = cg_solve(op, b, CGConfig(tol=1e-14, maxiter=2))
        assert not report.converged
        assert report.iterations == 2
        assert report.relative_residual > 1e-14

    def test_indefinite_raises(self):
        op = DenseOperator(np.diag([1.0, -1.0]))
        with pytest.raises(CGError):
            cg_solve(op, np.array([1.0, 1.0]))

    def test_zero_rhs_rejected(self):
        op = DenseOperator(np.eye(3))
        with pytest.raises(ValueError):
            cg_solve(op, np.zeros(3))

    def test_warm_start(self):
        a = hpd_matrix(30, 8)
        op = DenseOperator(a)
        b = np.ones(30, dtype=complex)
        exact = np.linalg.solve(a, b)
        x, report = cg_solve(op, b, CGConfig(tol=1e-12), x0=exact)
        assert report.converged
        assert report.iterations == 0

    def test_deterministic(self):
        a = hpd_matrix(40, 9)
        op = DenseOperator(a)
        b = np.arange(1, 41, dtype=complex)
        x1, r1 = cg_solve(op, b, CGConfig(tol=1e-13))
        x2, r2 = cg_solve(op, b, CGConfig(tol=1e-13))
        assert np.array_equal(x1, x2)
        assert r1 == r2

    def test_counter_untouched(self):
        op = DenseOperator(np.eye(5))
        cg_solve(op, np.ones(5, dtype=complex))
        assert op.n_matvec == 0
