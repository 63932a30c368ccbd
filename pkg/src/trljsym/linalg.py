"""Dense kernels shared by the eigensolvers.

Provides modified Gram-Schmidt orthonormalization with the sqrt(2) repeat
rule, cyclic Jacobi eigensolvers (real symmetric and complex Hermitian),
stable eigenpair sorting, and the banded-plus-spike projected matrix used
by the restarted Lanczos driver.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from numba import njit

# Repeat threshold for the reorthogonalization loop: a sweep is accepted
# once it removes less than a factor 1/gamma of the residual norm.
REORTH_GAMMA = math.sqrt(2.0)

# Residual norm below this fraction of the initial norm counts as breakdown.
BREAKDOWN_RTOL = 1e-14

# Reorthogonalization sweeps are capped to avoid livelock on pathological
# inputs; hitting the cap is reported, not fatal.
MAX_REORTH_SWEEPS = 5


class BreakdownError(RuntimeError):
    """The residual vanished: the vector lies in the span of the bases."""

    def __init__(self, message: str, residual_norm: float = 0.0):
        super().__init__(message)
        self.residual_norm = residual_norm


class EigNonConvergence(RuntimeError):
    """Jacobi sweeps exhausted without meeting the off-diagonal target."""


@njit(cache=True)
def _project_out(basis, col, vec):
    n = vec.shape[0]
    c = vec[0] - vec[0]  # typed zero
    for r in range(n):
        c += np.conj(basis[r, col]) * vec[r]
    for r in range(n):
        vec[r] -= basis[r, col] * c


@njit(cache=True)
def _mgs_sweep_single(basis, vec):
    for i in range(basis.shape[1]):
        _project_out(basis, i, vec)


@njit(cache=True)
def _mgs_sweep_pair(first, second, vec):
    # Interleaved: column i of the first set, then of the second, before
    # column i+1 of either.
    n1 = first.shape[1]
    n2 = second.shape[1]
    for i in range(max(n1, n2)):
        if i < n1:
            _project_out(first, i, vec)
        if i < n2:
            _project_out(second, i, vec)


def _mgs_sweep(bases, vec):
    if len(bases) == 1:
        _mgs_sweep_single(bases[0], vec)
    elif len(bases) == 2:
        _mgs_sweep_pair(bases[0], bases[1], vec)
    else:
        ncols = [b.shape[1] for b in bases]
        for i in range(max(ncols, default=0)):
            for basis, nc in zip(bases, ncols):
                if i < nc:
                    u = basis[:, i]
                    vec -= u * np.vdot(u, vec)


def mgs_orthonormalize(v, bases, gamma=REORTH_GAMMA, max_sweeps=MAX_REORTH_SWEEPS):
    """Orthonormalize ``v`` against the columns of each basis in ``bases``.

    Modified Gram-Schmidt, sweeping the basis columns in ascending column
    order and interleaving the sets (column i of each set, in the order the
    sets are given, before column i+1 of any).  The sweep repeats while the
    norm drops by more than a factor 1/gamma, i.e. until
    ``b_new * gamma > b_old``.

    Parameters
    ----------
    v : array_like
        Nonzero vector to orthonormalize.
    bases : sequence of ndarray
        Each entry is an (n, k_i) array with orthonormal columns.  An entry
        may have zero columns.
    gamma : float
        Repeat threshold, > 1.
    max_sweeps : int
        Cap on Gram-Schmidt sweeps; on hitting the cap the result is
        accepted with a warning.

    Returns
    -------
    q : ndarray
        Unit vector orthogonal to every supplied basis column.
    bnorm : float
        Norm of the residual after the final sweep, before normalization.
    sweeps : int
        Number of full sweeps performed.

    Raises
    ------
    BreakdownError
        If the residual norm falls below ``BREAKDOWN_RTOL`` times the
        initial norm, signaling that ``v`` lies in the span of the bases.
    """
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    bases = tuple(np.asarray(b) for b in bases)
    dtype = np.result_type(np.float64, np.asarray(v).dtype,
                           *(b.dtype for b in bases))
    v = np.array(v, dtype=dtype, copy=True)
    bases = tuple(np.asarray(b, dtype=dtype) for b in bases)
    b_init = float(np.linalg.norm(v))
    if b_init == 0.0:
        raise BreakdownError("input vector is zero", 0.0)
    b_prev = b_init
    sweeps = 0
    while True:
        _mgs_sweep(bases, v)
        bnorm = float(np.linalg.norm(v))
        sweeps += 1
        if bnorm * gamma > b_prev:
            break
        if sweeps >= max_sweeps:
            warnings.warn(
                "reorthogonalization did not settle within "
                f"{max_sweeps} sweeps (norm {bnorm:.3e})",
                RuntimeWarning,
                stacklevel=2,
            )
            break
        b_prev = bnorm
    if bnorm < BREAKDOWN_RTOL * b_init:
        raise BreakdownError(
            f"residual norm {bnorm:.3e} below breakdown threshold "
            f"({BREAKDOWN_RTOL:.0e} x {b_init:.3e})",
            bnorm,
        )
    return v / bnorm, bnorm, sweeps


def _jacobi_threshold(norm_f, n, tol):
    # Entries below this can be skipped: even n^2 of them leave the
    # off-diagonal Frobenius norm under 0.5*tol*norm_f.
    return 0.5 * tol * norm_f / max(n, 1)


def _offdiag_norm(a):
    # Direct sum over off-diagonal entries; subtracting squared norms
    # would cancel catastrophically near convergence.
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


@njit(cache=True)
def _jacobi_sweep_real(a, z, skip):
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if abs(apq) <= skip:
                continue
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            if theta >= 0.0:
                t = 1.0 / (theta + math.hypot(theta, 1.0))
            else:
                t = -1.0 / (-theta + math.hypot(theta, 1.0))
            c = 1.0 / math.hypot(t, 1.0)
            s = t * c
            app = a[p, p]
            aqq = a[q, q]
            for r in range(n):
                arp = a[r, p]
                arq = a[r, q]
                a[r, p] = c * arp - s * arq
                a[r, q] = s * arp + c * arq
            for r in range(n):
                apr = a[p, r]
                aqr = a[q, r]
                a[p, r] = c * apr - s * aqr
                a[q, r] = s * apr + c * aqr
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0
            for r in range(n):
                zrp = z[r, p]
                zrq = z[r, q]
                z[r, p] = c * zrp - s * zrq
                z[r, q] = s * zrp + c * zrq


@njit(cache=True)
def _jacobi_sweep_herm(a, z, skip):
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            g = a[p, q]
            absg = abs(g)
            if absg <= skip:
                continue
            # Phase rotation makes the 2x2 block real, then the real
            # Jacobi rotation annihilates it: G = diag(1, u) @ R(c, s)
            # with u = conj(g)/|g|.
            u = np.conj(g) / absg
            uc = np.conj(u)
            app = a[p, p].real
            aqq = a[q, q].real
            theta = (aqq - app) / (2.0 * absg)
            if theta >= 0.0:
                t = 1.0 / (theta + math.hypot(theta, 1.0))
            else:
                t = -1.0 / (-theta + math.hypot(theta, 1.0))
            c = 1.0 / math.hypot(t, 1.0)
            s = t * c
            su = s * u
            cu = c * u
            for r in range(n):
                arp = a[r, p]
                arq = a[r, q]
                a[r, p] = c * arp - su * arq
                a[r, q] = s * arp + cu * arq
            for r in range(n):
                apr = a[p, r]
                aqr = a[q, r]
                a[p, r] = c * apr - s * uc * aqr
                a[q, r] = s * apr + c * uc * aqr
            a[p, p] = complex(app - t * absg, 0.0)
            a[q, q] = complex(aqq + t * absg, 0.0)
            a[p, q] = 0.0
            a[q, p] = 0.0
            for r in range(n):
                zrp = z[r, p]
                zrq = z[r, q]
                z[r, p] = c * zrp - su * zrq
                z[r, q] = s * zrp + cu * zrq


def symmetric_eig_small(mat, tol=1e-14, max_sweeps=50):
    """Eigendecomposition of a small real symmetric matrix by cyclic Jacobi.

    Returns ``(lam, z)`` with ``mat @ z = z @ diag(lam)`` and ``z`` real
    orthogonal.  Eigenvalues come out in the diagonal order left by the
    sweeps (no sorting; see :func:`sort_eigenpairs`).  Iterates until the
    off-diagonal Frobenius norm is at most ``tol`` times the Frobenius norm
    of the input.

    Raises
    ------
    EigNonConvergence
        If ``max_sweeps`` cyclic sweeps do not reach the target.
    """
    a = np.array(mat, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    z = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), z
    norm_f = float(np.linalg.norm(a))
    if norm_f == 0.0:
        return np.zeros(n), z
    skip = _jacobi_threshold(norm_f, n, tol)
    target = tol * norm_f
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= target:
            lam = np.diag(a).copy()
            return lam, z
        _jacobi_sweep_real(a, z, skip)
    raise EigNonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def hermitian_eig(mat, tol=1e-14, max_sweeps=60):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.

    The complex analogue of :func:`symmetric_eig_small`; used as the dense
    oracle for cross-checking iterative results.  Returns ``(lam, z)`` with
    real ``lam`` and unitary ``z``.
    """
    a = np.array(mat, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    z = np.eye(n, dtype=complex)
    if n < 2:
        return np.diag(a).real.copy(), z
    norm_f = float(np.linalg.norm(a))
    if norm_f == 0.0:
        return np.zeros(n), z
    skip = _jacobi_threshold(norm_f, n, tol)
    target = tol * norm_f
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= target:
            return np.diag(a).real.copy(), z
        _jacobi_sweep_herm(a, z, skip)
    raise EigNonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def sort_eigenpairs(lam, z, key="descending-value", flags=None):
    """Sort eigenpairs in place with a stable permutation.

    ``key`` is either ``"descending-value"`` (largest eigenvalue first) or
    ``"converged-first"`` (entries with a True flag move to the front,
    relative order otherwise preserved; requires ``flags``).  Columns of
    ``z`` are permuted identically with ``lam``.  Returns the permutation
    so callers can reorder any companion arrays.
    """
    lam = np.asarray(lam)
    if key == "descending-value":
        order = np.argsort(-lam, kind="stable")
    elif key == "converged-first":
        if flags is None:
            raise ValueError("converged-first sort requires flags")
        flags = np.asarray(flags, dtype=bool)
        if flags.shape[0] != lam.shape[0]:
            raise ValueError("flags length must match eigenvalue count")
        order = np.argsort(np.where(flags, 0, 1), kind="stable")
    else:
        raise ValueError(f"unknown sort key: {key!r}")
    lam[:] = lam[order]
    z[:, :] = z[:, order]
    return order


class ProjectedMatrix:
    """Real (m+1) x m projected matrix with lower-triangle storage.

    The leading ``ncols`` x ``ncols`` block is the symmetric projection of
    the operator onto the current basis; only the lower triangle is
    written (diagonal, subdiagonal, and the coupling row left by a
    restart) and the upper triangle is mirrored on read.  Row ``ncols``
    (0-based) carries the coupling to the next basis vector.
    """

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("m must be at least 1")
        self.t = np.zeros((m + 1, m))
        self.ncols = 0

    @property
    def m(self) -> int:
        return self.t.shape[1]

    def symmetric_block(self, j=None):
        """Dense symmetric j x j block, mirrored from the lower triangle."""
        if j is None:
            j = self.ncols
        block = np.tril(self.t[:j, :j])
        return block + np.tril(block, -1).T

    def coupling_row(self, j=None):
        """Copy of the boundary row t[j, :j] coupling to the next vector."""
        if j is None:
            j = self.ncols
        return self.t[j, :j].copy()

    def reset(self):
        self.t[:, :] = 0.0
        self.ncols = 0
