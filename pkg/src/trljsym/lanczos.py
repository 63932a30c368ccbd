"""Lanczos basis extension, with and without dual-subspace orthogonalization.

The dual variant keeps, alongside the Krylov basis V, the conjugate
partner basis ``W = J conj(V)`` and orthogonalizes every new vector
against both, so the search stays inside one member of each degenerate
eigenvector pair.  The plain variant (used by the standard restarted
solver) drops W and fully reorthogonalizes against V only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cg import CGConfig
from .linalg import BreakdownError, ProjectedMatrix, mgs_orthonormalize

MODES = ("normal", "invert")

# Computed diagonal entries must be real for a Hermitian operator; the
# imaginary part is discarded only after this check.
_IMAG_ATOL = 1e-13
_IMAG_RTOL = 1e-12


class LanczosBreakdown(RuntimeError):
    """An invariant subspace was found at the given 1-based step.

    The state holds a valid decomposition for the completed columns with
    a zero boundary coupling; the basis vector for the failed step is not
    set and the caller decides how (or whether) to continue.
    """

    def __init__(self, step: int):
        super().__init__(f"Lanczos breakdown at step {step}")
        self.step = step


class HermiticityError(ValueError):
    """A projected diagonal entry came out non-real."""


@dataclass
class KrylovState:
    """Basis V (optionally dual W), projected matrix, mode, matvec tally.

    ``V`` has room for m+1 columns; columns ``0..tbar.ncols`` are valid.
    In the dual variant ``W[:, i]`` is exactly ``J conj(V[:, i])``.
    """

    V: np.ndarray
    tbar: ProjectedMatrix
    W: np.ndarray | None = None
    mode: str = "normal"
    n_mv: int = 0
    reorth_extra: int = 0

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def ncols(self) -> int:
        return self.tbar.ncols

    @property
    def dual(self) -> bool:
        return self.W is not None


def make_state(v1, m: int, j_op=None, mode: str = "normal") -> KrylovState:
    """Fresh state seeded with the (normalized) start vector ``v1``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    v1 = np.asarray(v1, dtype=complex)
    n = v1.shape[0]
    nrm = np.linalg.norm(v1)
    if nrm == 0.0:
        raise ValueError("start vector must be nonzero")
    v1 = v1 / nrm
    # Fortran order: basis columns are read sequentially in the
    # orthogonalization sweeps.
    vmat = np.zeros((n, m + 1), dtype=complex, order="F")
    vmat[:, 0] = v1
    wmat = None
    if j_op is not None:
        wmat = np.zeros((n, m + 1), dtype=complex, order="F")
        wmat[:, 0] = j_op.apply_conj(v1)
    return KrylovState(V=vmat, tbar=ProjectedMatrix(m), W=wmat, mode=mode)


def _real_diagonal(value: complex) -> float:
    if abs(value.imag) > _IMAG_RTOL * abs(value.real) + _IMAG_ATOL:
        raise HermiticityError(
            f"projected diagonal entry {value} is not real; "
            "operator is not Hermitian to working precision"
        )
    return value.real


def _extend(op, state: KrylovState, k: int, m: int, j_op, cg: CGConfig | None):
    v = state.V
    w = state.W
    t = state.tbar.t
    if not 0 <= k < m:
        raise ValueError("need 0 <= k < m")
    if m > state.tbar.m:
        raise ValueError("m exceeds the allocated projected matrix")
    if state.ncols < k:
        raise ValueError("state does not hold a k-column decomposition")
    for j in range(k + 1, m + 1):
        vj = v[:, j - 1]
        if state.mode == "normal":
            vnew = op.apply(vj)
        else:
            vnew = op.apply_inverse(vj, cg=cg)
        state.n_mv += 1
        t[j - 1, j - 1] = _real_diagonal(np.vdot(vj, vnew))
        vnew = vnew - t[j - 1, j - 1] * vj
        bases = (w[:, :j], v[:, :j]) if w is not None else (v[:, :j],)
        try:
            q, beta, sweeps = mgs_orthonormalize(vnew, bases)
        except BreakdownError:
            t[j, j - 1] = 0.0
            state.tbar.ncols = j
            raise LanczosBreakdown(j) from None
        state.reorth_extra += sweeps - 1
        t[j, j - 1] = beta
        v[:, j] = q
        if w is not None:
            w[:, j] = j_op.apply_conj(q)
        state.tbar.ncols = j
    return state


def lanczos_extend_jsym(op, j_op, state: KrylovState, k: int, m: int,
                        cg: CGConfig | None = None) -> KrylovState:
    """Run steps k+1..m of the dual-subspace Lanczos extension.

    Each step applies the operator (or its CG inverse in invert mode),
    subtracts the diagonal projection, orthogonalizes against all of
    ``w_1..w_j`` and ``v_1..v_j`` (partner before primal, ascending) with
    the sqrt(2) repeat rule, normalizes, and forms the new dual vector
    ``w_{j+1} = J conj(v_{j+1})``.  The matvec tally grows by m - k.

    Raises :class:`LanczosBreakdown` when an invariant subspace is hit;
    the state then holds the valid partial decomposition.
    """
    if state.W is None:
        raise ValueError("state has no dual basis; use lanczos_extend_plain")
    return _extend(op, state, k, m, j_op, cg)


def lanczos_extend_plain(op, state: KrylovState, k: int, m: int,
                         cg: CGConfig | None = None) -> KrylovState:
    """Run steps k+1..m of the plain Lanczos extension.

    Same as :func:`lanczos_extend_jsym` with every dual-basis step
    removed: full reorthogonalization against ``v_1..v_j`` only.
    """
    if state.W is not None:
        raise ValueError("state has a dual basis; use lanczos_extend_jsym")
    return _extend(op, state, k, m, None, cg)
