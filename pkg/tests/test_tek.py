import numpy as np
import pytest

from trljsym.linalg import hermitian_eig
from trljsym.randmat import gen_random_real_orthogonal
from trljsym.tek import (
    build_A_from_D,
    build_wilson_dirac,
    gamma_algebra,
    operator_dim,
    random_tek_operator,
    su_adjoint_dim,
)

ALG = gamma_algebra()
GAMMAS = ALG.gamma + (ALG.gamma5,)


class TestGammaAlgebra:
    def test_anticommutation_exact(self):
        for mu in range(5):
            for nu in range(5):
                anti = GAMMAS[mu] @ GAMMAS[nu] + GAMMAS[nu] @ GAMMAS[mu]
                want = 2.0 * np.eye(4) if mu == nu else np.zeros((4, 4))
                assert np.array_equal(anti, want)

    def test_hermitian_exact(self):
        for g in GAMMAS:
            assert np.array_equal(g, g.conj().T)

    def test_gamma5_explicit_form(self):
        want = np.array([[0, 0, 1, 0],
                         [0, 0, 0, 1],
                         [1, 0, 0, 0],
                         [0, 1, 0, 0]], dtype=complex)
        assert np.array_equal(ALG.gamma5, want)

    def test_c_matrix(self):
        c = ALG.c_matrix
        assert np.array_equal(c, np.real(ALG.gamma[3] @ ALG.gamma[1]))
        assert np.array_equal(c.T, -c)
        for mu in range(4):
            g = ALG.gamma[mu]
            assert np.array_equal(c @ g @ c.T, -g.T)

    def test_j_spin_properties(self):
        j = ALG.j_spin
        assert j.dtype == np.float64
        assert np.array_equal(j.T, -j)
        assert np.array_equal(j.T @ j, np.eye(4))
        assert np.array_equal(j @ j, -np.eye(4))

    def test_entries_are_quantized(self):
        allowed = {0, 1, -1, 1j, -1j}
        for g in GAMMAS:
            assert set(g.ravel().tolist()) <= allowed

    def test_read_only(self):
        with pytest.raises(ValueError):
            ALG.gamma5[0, 0] = 5.0


class TestWilsonDirac:
    def vs(self, d, seed=0):
        rng = np.random.default_rng(seed)
        return [gen_random_real_orthogonal(d, rng=rng) for _ in range(4)]

    def test_kappa_zero_is_identity(self):
        dirac = build_wilson_dirac(self.vs(5), 0.0)
        x = np.arange(20, dtype=complex)
        assert np.array_equal(dirac.apply(x), x)
        assert np.array_equal(dirac.matrix(), np.eye(20))

    def test_apply_matches_matrix(self):
        dirac = build_wilson_dirac(self.vs(6), 0.19)
        dm = dirac.matrix()
        rng = np.random.default_rng(1)
        x = rng.standard_normal(24) + 1j * rng.standard_normal(24)
        assert np.linalg.norm(dirac.apply(x) - dm @ x) <= 1e-12
        assert np.linalg.norm(dirac.apply_adjoint(x) - dm.conj().T @ x) <= 1e-12

    def test_gamma5_hermiticity(self):
        dirac = build_wilson_dirac(self.vs(24, seed=2), 0.19)
        dm = dirac.matrix()
        g5 = np.kron(ALG.gamma5, np.eye(24))
        assert np.max(np.abs(g5 @ dm @ g5 - dm.conj().T)) <= 1e-12

    def test_charge_conjugation_transpose(self):
        dirac = build_wilson_dirac(self.vs(24, seed=2), 0.19)
        dm = dirac.matrix()
        c = np.kron(ALG.c_matrix, np.eye(24))
        assert np.max(np.abs(c @ dm @ c.T - dm.T)) <= 1e-12

    def test_identities_hold_for_any_real_factors(self):
        # orthogonality is not required, only realness
        rng = np.random.default_rng(3)
        vs = [rng.standard_normal((4, 4)) for _ in range(4)]
        with pytest.warns(RuntimeWarning):
            dirac = build_wilson_dirac(vs, 0.1)
        dm = dirac.matrix()
        g5 = np.kron(ALG.gamma5, np.eye(4))
        c = np.kron(ALG.c_matrix, np.eye(4))
        assert np.max(np.abs(g5 @ dm @ g5 - dm.conj().T)) <= 1e-12
        assert np.max(np.abs(c @ dm @ c.T - dm.T)) <= 1e-12

    def test_rejects_wrong_count(self):
        with pytest.raises(ValueError):
            build_wilson_dirac(self.vs(4)[:3], 0.1)


class TestNormalForm:
    def test_kappa_zero_gives_identity(self):
        rng = np.random.default_rng(4)
        vs = [gen_random_real_orthogonal(3, rng=rng) for _ in range(4)]
        a_op, _ = build_A_from_D(build_wilson_dirac(vs, 0.0))
        x = np.arange(12, dtype=complex)
        assert np.allclose(a_op.apply(x), x, atol=0)

    def test_hermitian_j_symmetric_materialized(self, tek_cache):
        a_op, j_op, _ = tek_cache(24, 0)
        ad = a_op.as_matrix()
        assert np.max(np.abs(ad - ad.conj().T)) <= 1e-12
        jm = j_op.matrix()
        assert np.max(np.abs(jm @ ad @ jm.T - ad.T)) <= 1e-12

    def test_positive_semidefinite_and_paired(self, tek_cache):
        a_op, _, _ = tek_cache(24, 0)
        lam, _ = hermitian_eig(a_op.as_matrix())
        lam = np.sort(lam)
        assert lam[0] >= -1e-12
        pairs = lam.reshape(-1, 2)
        assert np.max(pairs[:, 1] - pairs[:, 0]) <= 1e-10

    def test_one_matvec_per_normal_apply(self, tek_cache):
        a_op, _, _ = tek_cache(24, 0)
        before = a_op.n_matvec
        a_op.apply(np.ones(96, dtype=complex))
        assert a_op.n_matvec == before + 1

    def test_apply_matches_materialization(self, tek_cache):
        a_op, _, dirac = tek_cache(24, 0)
        ad = a_op.as_matrix()
        rng = np.random.default_rng(6)
        x = rng.standard_normal(96) + 1j * rng.standard_normal(96)
        assert np.linalg.norm(a_op.apply(x, count=False) - ad @ x) <= 1e-12


class TestSizing:
    def test_su_adjoint_dim(self):
        assert su_adjoint_dim(13) == 168
        assert su_adjoint_dim(289) == 83520

    def test_full_dimension(self):
        assert operator_dim(289) == 334080

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            su_adjoint_dim(1)


class TestRandomTekOperator:
    def test_requires_exactly_one_sizing(self):
        with pytest.raises(ValueError):
            random_tek_operator(kappa=0.19, seed=0)
        with pytest.raises(ValueError):
            random_tek_operator(d=4, su_n=3, seed=0)

    def test_su_sizing(self):
        a_op, j_op, dirac = random_tek_operator(su_n=3, seed=0)
        assert dirac.d == 8
        assert a_op.dim == 32
        assert j_op.dim == 32

    def test_deterministic(self):
        a1, _, d1 = random_tek_operator(d=5, seed=9)
        a2, _, d2 = random_tek_operator(d=5, seed=9)
        for u, v in zip(d1.color_factors, d2.color_factors):
            assert np.array_equal(u, v)
