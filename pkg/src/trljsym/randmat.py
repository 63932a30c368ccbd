"""Random test-matrix generators.

Builds dense Hermitian J-symmetric matrices with a planted doubly
degenerate spectrum, and random real orthogonal factors for the
spin-tensor operator.  All randomness flows through numpy's seedable
PCG64 generator so identical seeds give bit-identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import BreakdownError, mgs_orthonormalize
from .operators import CanonicalBlockJ, DenseOperator

# Fresh random columns drawn when Gram-Schmidt hits a dependent one.
MAX_COLUMN_RETRIES = 3


class GenerationError(RuntimeError):
    """Random column generation kept producing dependent vectors."""


def j_conjugate_canonical(mat):
    """Return ``J M J^{-1}`` for the canonical block J, exactly.

    A pure block permutation with sign flips (no arithmetic), so the
    result is bit-exact:  [[M11, M12], [M21, M22]] -> [[M22, -M21],
    [-M12, M11]].
    """
    n = mat.shape[0]
    h = n // 2
    out = np.empty_like(mat)
    out[:h, :h] = mat[h:, h:]
    out[:h, h:] = -mat[h:, :h]
    out[h:, :h] = -mat[:h, h:]
    out[h:, h:] = mat[:h, :h]
    return out


@dataclass(frozen=True)
class PlantedSpectrumMatrix:
    """Dense Hermitian J-symmetric matrix with known doubled spectrum.

    ``matrix`` is 2*n_half square; every value in ``eigenvalues`` occurs
    with multiplicity exactly two.  ``x1``/``x2`` are the constrained
    blocks of the diagonalizing unitary.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    seed: int
    j_realization: str = field(default="canonical-block")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def operator(self) -> DenseOperator:
        return DenseOperator(self.matrix)

    def j_operator(self) -> CanonicalBlockJ:
        return CanonicalBlockJ(self.dim)


def _random_column(rng, n):
    return rng.uniform(-1.0, 1.0, n) + 1j * rng.uniform(-1.0, 1.0, n)


def gen_random_hjs(n_half: int, seed: int) -> PlantedSpectrumMatrix:
    """Generate a random Hermitian J-symmetric matrix of size 2*n_half.

    Eigenvalues are drawn uniformly from (0, 1) and planted with
    multiplicity two.  The stacked columns [x1_j; x2_j] start from uniform
    complex entries and are orthonormalized against all previous columns
    and their J-partners (partner first, matching the dual Lanczos sweep),
    which enforces the unitarity constraints
    ``x1^H x1 + x2^H x2 = I`` and ``x1^T x2 - x2^T x1 = 0``.

    The assembled matrix is projected onto exact Hermiticity and exact
    J-symmetry (both are entry permutations plus averaging, so the checks
    hold to the last bit).
    """
    if n_half < 1:
        raise ValueError("n_half must be at least 1")
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.0, 1.0, n_half)
    n = 2 * n_half
    j_op = CanonicalBlockJ(n)
    cols = np.zeros((n, n_half), dtype=complex, order="F")
    partners = np.zeros((n, n_half), dtype=complex, order="F")
    for j in range(n_half):
        for _ in range(MAX_COLUMN_RETRIES):
            try:
                q, _, _ = mgs_orthonormalize(
                    _random_column(rng, n), (partners[:, :j], cols[:, :j])
                )
                break
            except BreakdownError:
                continue
        else:
            raise GenerationError(
                f"column {j} stayed dependent after {MAX_COLUMN_RETRIES} retries"
            )
        cols[:, j] = q
        partners[:, j] = j_op.apply_conj(q)
    x1 = cols[:n_half, :].copy()
    x2 = cols[n_half:, :].copy()
    u = np.empty((n, n), dtype=complex)
    u[:n_half, :n_half] = x1
    u[:n_half, n_half:] = -np.conj(x2)
    u[n_half:, :n_half] = x2
    u[n_half:, n_half:] = np.conj(x1)
    lam2 = np.concatenate([lam, lam])
    a = (u * lam2) @ u.conj().T
    a = 0.5 * (a + a.conj().T)
    a = 0.5 * (a + j_conjugate_canonical(a.T))
    a.setflags(write=False)
    x1.setflags(write=False)
    x2.setflags(write=False)
    lam.setflags(write=False)
    return PlantedSpectrumMatrix(matrix=a, eigenvalues=lam, x1=x1, x2=x2, seed=seed)


def gen_random_real_orthogonal(dim: int, seed: int | None = None, rng=None):
    """Random real orthogonal matrix from column-by-column Gram-Schmidt.

    Columns start as standard Gaussian draws and are orthonormalized
    against the previous ones.  Pass either a seed or an existing
    generator (for drawing several factors from one stream).
    """
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    v = np.zeros((dim, dim), order="F")
    for j in range(dim):
        for _ in range(MAX_COLUMN_RETRIES):
            try:
                q, _, _ = mgs_orthonormalize(rng.standard_normal(dim), (v[:, :j],))
                break
            except BreakdownError:
                continue
        else:
            raise GenerationError(
                f"column {j} stayed dependent after {MAX_COLUMN_RETRIES} retries"
            )
        v[:, j] = q.real
    return v
