"""Conjugate gradient solver for Hermitian positive-definite systems.

Backs the invert mode of the eigensolvers, where every inverse application
is computed iteratively.  Plain CG, no preconditioning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CGError(RuntimeError):
    """CG failed: non-convergence or loss of positive definiteness."""


@dataclass(frozen=True)
class CGConfig:
    """Relative residual target and iteration cap for a CG solve."""

    tol: float = 1e-14
    maxiter: int = 10000

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.maxiter < 1:
            raise ValueError("maxiter must be at least 1")


@dataclass(frozen=True)
class CGReport:
    iterations: int
    relative_residual: float
    converged: bool


def default_cg_config(eig_tol: float, maxiter: int = 10000) -> CGConfig:
    """CG tolerance tight enough not to limit an eigenresidual of eig_tol."""
    return CGConfig(tol=min(1e-14, eig_tol / 10.0), maxiter=maxiter)


def cg_solve(op, b, cfg=None, x0=None, callback=None):
    """Solve ``op x = b`` for a Hermitian positive-definite operator.

    Parameters
    ----------
    op
        Operator exposing ``apply(v, count=False)``; must be Hermitian
        positive definite.  Applications here are not counted against the
        operator's matvec counter.
    b : array_like
        Nonzero right-hand side.
    cfg : CGConfig, optional
    x0 : array_like, optional
        Initial guess; defaults to zero.
    callback : callable, optional
        Invoked as ``callback(k, x_k)`` after each iteration.

    Returns
    -------
    (x, report) : (ndarray, CGReport)
        Best iterate and solve statistics.  ``report.converged`` is False
        when the iteration cap is hit; a non-positive curvature raises
        :class:`CGError` since it contradicts positive definiteness.
    """
    if cfg is None:
        cfg = CGConfig()
    b = np.asarray(b, dtype=complex)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        raise ValueError("right-hand side must be nonzero")
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=complex)
        r = b - op.apply(x, count=False)
    p = r.copy()
    rs = float(np.real(np.vdot(r, r)))
    rel = np.sqrt(rs) / bnorm
    if rel <= cfg.tol:
        return x, CGReport(0, rel, True)
    iterations = 0
    for k in range(1, cfg.maxiter + 1):
        ap = op.apply(p, count=False)
        pap = float(np.real(np.vdot(p, ap)))
        if pap <= 0.0:
            raise CGError(
                f"non-positive curvature p^H A p = {pap:.3e}; "
                "operator is not positive definite"
            )
        alpha = rs / pap
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.real(np.vdot(r, r)))
        iterations = k
        if callback is not None:
            callback(k, x)
        rel = np.sqrt(rs_new) / bnorm
        if rel <= cfg.tol:
            return x, CGReport(iterations, rel, True)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, CGReport(iterations, rel, False)
