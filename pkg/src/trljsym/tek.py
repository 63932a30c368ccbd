"""Single-site Wilson-Dirac-type operator on a spin (x) color space.

The operator is ``D = I - kappa * sum_mu [(1 - gamma_mu) V_mu
+ (1 + gamma_mu) V_mu^T]`` with four real orthogonal color factors
``V_mu`` and the Hermitian 4x4 gamma matrices below.  It satisfies
gamma5-Hermiticity ``gamma5 D gamma5 = D^H`` and the charge-conjugation
identity ``C D C^T = D^T``, from which ``A = D D^H`` is Hermitian and
J-symmetric with the spin-tensor ``J = C gamma5``.

Vectors live on the flattened (4, d) layout with the spin index slow
(outermost); this layout is normative for file I/O.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .operators import LinearOperator, SpinTensorJ
from .randmat import gen_random_real_orthogonal

ORTHOGONALITY_TOL = 1e-12

# Mid-range hopping parameter used by the shipped experiments; small-d
# instances stay positive definite here (checked per seed by the tests).
DEFAULT_KAPPA = 0.19


def _gamma_matrices():
    i = 1j
    g1 = np.array(
        [[0, 0, 0, -i],
         [0, 0, -i, 0],
         [0, i, 0, 0],
         [i, 0, 0, 0]], dtype=complex)
    g2 = np.array(
        [[0, 0, 0, -1],
         [0, 0, 1, 0],
         [0, 1, 0, 0],
         [-1, 0, 0, 0]], dtype=complex)
    g3 = np.array(
        [[0, 0, -i, 0],
         [0, 0, 0, i],
         [i, 0, 0, 0],
         [0, -i, 0, 0]], dtype=complex)
    g4 = np.array(
        [[1, 0, 0, 0],
         [0, 1, 0, 0],
         [0, 0, -1, 0],
         [0, 0, 0, -1]], dtype=complex)
    return g1, g2, g3, g4


@dataclass(frozen=True)
class GammaAlgebra:
    """The explicit gamma matrices with gamma5, C = gamma4 gamma2, and
    the real skew-orthogonal spin block j_spin = C gamma5."""

    gamma: tuple
    gamma5: np.ndarray
    c_matrix: np.ndarray
    j_spin: np.ndarray


def gamma_algebra() -> GammaAlgebra:
    """Build the gamma algebra; all products are exact (entries 0, +-1, +-i)."""
    g1, g2, g3, g4 = _gamma_matrices()
    g5 = g4 @ g1 @ g2 @ g3
    c = np.real(g4 @ g2)
    j_spin = np.real((g4 @ g2) @ g5)
    for m in (g1, g2, g3, g4, g5):
        m.setflags(write=False)
    c.setflags(write=False)
    j_spin.setflags(write=False)
    return GammaAlgebra(gamma=(g1, g2, g3, g4), gamma5=g5, c_matrix=c, j_spin=j_spin)


def su_adjoint_dim(su_n: int) -> int:
    """Color dimension of the adjoint representation of SU(N): N^2 - 1."""
    if su_n < 2:
        raise ValueError("su_n must be at least 2")
    return su_n * su_n - 1


def operator_dim(su_n: int) -> int:
    """Full spin (x) color dimension, 4 * (N^2 - 1)."""
    return 4 * su_adjoint_dim(su_n)


class WilsonDiracOperator:
    """Matrix-free D on the flattened (4, d) spin-major layout.

    Not Hermitian itself; combine with :func:`build_A_from_D` for the
    Hermitian J-symmetric normal form.  ``apply_adjoint`` computes D^H
    directly from the building blocks (real V, Hermitian gammas), not via
    the gamma5 identity, so the identity stays independently checkable.
    """

    def __init__(self, vs, kappa: float):
        vs = tuple(np.array(v, dtype=float) for v in vs)
        if len(vs) != 4:
            raise ValueError("expected four color factors")
        d = vs[0].shape[0]
        for v in vs:
            if v.shape != (d, d):
                raise ValueError("color factors must be square and equal-sized")
            if not np.all(np.isfinite(v)):
                raise ValueError("color factors must be finite")
            defect = np.max(np.abs(v.T @ v - np.eye(d)))
            if defect > ORTHOGONALITY_TOL:
                warnings.warn(
                    f"color factor deviates from orthogonality by {defect:.3e}; "
                    "symmetry identities only need realness, proceeding",
                    RuntimeWarning,
                    stacklevel=3,
                )
        self.d = d
        self.kappa = float(kappa)
        self._vs = tuple(np.ascontiguousarray(v, dtype=complex) for v in vs)
        self._vs_t = tuple(np.ascontiguousarray(v.T, dtype=complex) for v in vs)
        for v in self._vs + self._vs_t:
            v.setflags(write=False)
        alg = gamma_algebra()
        self.algebra = alg
        eye4 = np.eye(4, dtype=complex)
        self._one_minus = tuple(eye4 - g for g in alg.gamma)
        self._one_plus = tuple(eye4 + g for g in alg.gamma)

    @property
    def dim(self) -> int:
        return 4 * self.d

    @property
    def color_factors(self):
        return self._vs

    def apply(self, x):
        x = np.asarray(x, dtype=complex).reshape(4, self.d)
        acc = np.zeros_like(x)
        for mu in range(4):
            acc += self._one_minus[mu] @ (x @ self._vs_t[mu])
            acc += self._one_plus[mu] @ (x @ self._vs[mu])
        return (x - self.kappa * acc).ravel()

    def apply_adjoint(self, x):
        x = np.asarray(x, dtype=complex).reshape(4, self.d)
        acc = np.zeros_like(x)
        for mu in range(4):
            acc += self._one_minus[mu] @ (x @ self._vs[mu])
            acc += self._one_plus[mu] @ (x @ self._vs_t[mu])
        return (x - self.kappa * acc).ravel()

    def matrix(self):
        """Dense realization (spin index slow), for small d only."""
        d = self.d
        out = np.eye(4 * d, dtype=complex)
        for mu in range(4):
            out -= self.kappa * np.kron(self._one_minus[mu], self._vs[mu])
            out -= self.kappa * np.kron(self._one_plus[mu], self._vs_t[mu])
        return out


def build_wilson_dirac(vs, kappa: float) -> WilsonDiracOperator:
    """Construct D from four real (preferably orthogonal) color factors."""
    return WilsonDiracOperator(vs, kappa)


class NormalFormOperator(LinearOperator):
    """The Hermitian J-symmetric combination ``A = D D^H``.

    One application of A (D^H then D) counts as one matvec.
    """

    def __init__(self, dirac: WilsonDiracOperator):
        super().__init__(dirac.dim)
        self.dirac = dirac

    def _apply(self, v):
        return self.dirac.apply(self.dirac.apply_adjoint(v))

    def as_matrix(self):
        dm = self.dirac.matrix()
        return dm @ dm.conj().T


def build_A_from_D(dirac: WilsonDiracOperator):
    """Return ``(A, J)`` with ``A = D D^H`` and the spin-tensor J = C gamma5."""
    a_op = NormalFormOperator(dirac)
    j_op = SpinTensorJ(dirac.d, dirac.algebra.j_spin)
    return a_op, j_op


def random_tek_operator(d: int | None = None, su_n: int | None = None,
                        kappa: float = DEFAULT_KAPPA, seed: int = 0):
    """Build ``(A, J, D)`` from seeded random real orthogonal color factors.

    Give either the color dimension ``d`` directly or ``su_n`` for the
    adjoint sizing d = N^2 - 1.  The four factors are drawn sequentially
    from one PCG64 stream, so the triple is reproducible from the seed.
    """
    if (d is None) == (su_n is None):
        raise ValueError("give exactly one of d or su_n")
    if d is None:
        d = su_adjoint_dim(su_n)
    rng = np.random.default_rng(seed)
    vs = [gen_random_real_orthogonal(d, rng=rng) for _ in range(4)]
    dirac = build_wilson_dirac(vs, kappa)
    a_op, j_op = build_A_from_D(dirac)
    return a_op, j_op, dirac
