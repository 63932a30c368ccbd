"""Linear operator and J-map abstractions.

A :class:`LinearOperator` wraps the "apply A to a vector" capability with
dimension metadata and a matvec counter; the counter is the only mutable
state and is updated under a lock so concurrent applies never lose counts.
A :class:`JOperator` is the conjugate-linear map ``v -> J conj(v)`` for a
real skew-symmetric orthogonal J, with a canonical two-block realization
and a spin-tensor realization (see :mod:`trljsym.tek`).
"""

from __future__ import annotations

import threading

import numpy as np

from .cg import CGConfig, CGError, cg_solve


class DimensionMismatch(ValueError):
    """Vector length does not match the operator dimension."""


class LinearOperator:
    """Base class for Hermitian operators applied matrix-free.

    Subclasses implement ``_apply``.  ``apply`` checks dimensions and
    increments the matvec counter (unless ``count=False``, used for
    bookkeeping applications excluded from cost accounting, e.g. true
    residual checks).  Operators are immutable after construction except
    for the counters.
    """

    def __init__(self, dim: int):
        self._dim = int(dim)
        self._n_matvec = 0
        self._cg_iterations = 0
        self._lock = threading.Lock()
        self._norm_estimate = None

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def n_matvec(self) -> int:
        """Counted operator applications (inverse applications count as 1)."""
        return self._n_matvec

    @property
    def cg_iterations(self) -> int:
        """Total inner CG iterations spent in inverse applications."""
        return self._cg_iterations

    def reset_counters(self):
        with self._lock:
            self._n_matvec = 0
            self._cg_iterations = 0

    def _check(self, v):
        v = np.asarray(v)
        if v.shape != (self._dim,):
            raise DimensionMismatch(
                f"expected vector of length {self._dim}, got shape {v.shape}"
            )
        return v

    def _apply(self, v):
        raise NotImplementedError

    def apply(self, v, count=True):
        """Return ``A v``; increments the matvec counter by one."""
        v = self._check(v)
        out = self._apply(v)
        if count:
            with self._lock:
                self._n_matvec += 1
        return out

    def apply_inverse(self, v, cg: CGConfig | None = None, count=True, x0=None):
        """Return ``A^{-1} v`` via CG; counts as one matvec.

        Inner CG iterations are logged separately in ``cg_iterations``.
        Raises :class:`CGError` if CG does not reach its tolerance within
        the cap, or if non-positive curvature reveals a non-HPD operator.
        """
        v = self._check(v)
        x, report = cg_solve(self, v, cfg=cg, x0=x0)
        if not report.converged:
            raise CGError(
                f"CG stalled at relative residual {report.relative_residual:.3e} "
                f"after {report.iterations} iterations"
            )
        if count:
            with self._lock:
                self._n_matvec += 1
                self._cg_iterations += report.iterations
        return x

    def as_matrix(self):
        """Dense matrix realization, if the operator is materializable."""
        raise NotImplementedError(f"{type(self).__name__} is not materializable")

    def norm_estimate(self, iterations=20, seed=1905):
        """2-norm estimate from a fixed number of power iterations (cached).

        Uses uncounted applications so cost accounting is unaffected.
        """
        if self._norm_estimate is None:
            rng = np.random.default_rng(seed)
            v = rng.standard_normal(self._dim) + 1j * rng.standard_normal(self._dim)
            v /= np.linalg.norm(v)
            est = 0.0
            for _ in range(iterations):
                w = self.apply(v, count=False)
                est = float(np.linalg.norm(w))
                if est == 0.0:
                    break
                v = w / est
            self._norm_estimate = est
        return self._norm_estimate


class DenseOperator(LinearOperator):
    """Hermitian operator held as a dense complex matrix."""

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=complex)
        n = matrix.shape[0]
        if matrix.shape != (n, n):
            raise ValueError("matrix must be square")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("matrix entries must be finite")
        matrix.setflags(write=False)
        super().__init__(n)
        self._matrix = matrix

    def _apply(self, v):
        return self._matrix @ v

    def as_matrix(self):
        return self._matrix


class JOperator:
    """Conjugate-linear map ``v -> J conj(v)`` for real orthogonal skew J.

    Satisfies ``J^T = -J`` and ``J^T J = I``, hence the map is an isometry
    and an involution up to sign: applying it twice gives ``-v``.
    """

    def __init__(self, dim: int):
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    def _check(self, v):
        v = np.asarray(v)
        if v.shape != (self._dim,):
            raise DimensionMismatch(
                f"expected vector of length {self._dim}, got shape {v.shape}"
            )
        return v

    def apply_conj(self, v):
        """Return ``J conj(v)``."""
        raise NotImplementedError

    def matrix(self):
        """Dense real J (for small-dimension checks)."""
        raise NotImplementedError


class CanonicalBlockJ(JOperator):
    """The canonical two-block realization J = [[0, -I], [I, 0]]."""

    def __init__(self, dim: int):
        if dim % 2 != 0:
            raise ValueError("canonical block J requires even dimension")
        super().__init__(dim)
        self._half = dim // 2

    def apply_conj(self, v):
        v = self._check(v)
        u = np.conj(v)
        out = np.empty_like(u)
        out[: self._half] = -u[self._half:]
        out[self._half:] = u[: self._half]
        return out

    def matrix(self):
        h = self._half
        j = np.zeros((self._dim, self._dim))
        j[:h, h:] = -np.eye(h)
        j[h:, :h] = np.eye(h)
        return j


class SpinTensorJ(JOperator):
    """Spin-tensor realization ``J = J_spin (x) I_d`` on a (4, d) layout.

    The spin index is the slow (outermost) index of the flattened vector,
    so the map reshapes to (4, d), applies the real 4x4 ``j_spin`` block,
    and flattens back.
    """

    def __init__(self, d: int, j_spin):
        j_spin = np.array(j_spin, dtype=float)
        if j_spin.shape != (4, 4):
            raise ValueError("j_spin must be 4x4")
        super().__init__(4 * d)
        self._d = d
        j_spin.setflags(write=False)
        self._j_spin = j_spin

    @property
    def j_spin(self):
        return self._j_spin

    def apply_conj(self, v):
        v = self._check(v)
        x = np.conj(v).reshape(4, self._d)
        return (self._j_spin @ x).ravel()

    def matrix(self):
        return np.kron(self._j_spin, np.eye(self._d))
