"""Thick-restart Lanczos drivers.

``trlan_jsym`` runs the dual-subspace variant: the Lanczos basis is kept
orthogonal to its conjugate partner basis, so each doubly degenerate
eigenvalue is found exactly once and the partner eigenvector is
reconstructed afterwards from ``y = J conj(x)``.  ``trlan_standard`` is
the classic thick-restart baseline (no dual basis); to recover both
members of each degenerate pair it is normally run with all parameters
doubled (see :func:`doubled_config`).

Both drivers restart through the same compression: eigendecompose the
projected matrix, keep the best ``k = min(icnv + mwin, m - 1)`` Ritz
vectors plus the boundary vector, move the boundary couplings into the
spike row, and lock converged pairs by zeroing their coupling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cg import CGConfig, default_cg_config
from .lanczos import (
    LanczosBreakdown,
    lanczos_extend_jsym,
    lanczos_extend_plain,
    make_state,
)
from .linalg import (
    BreakdownError,
    mgs_orthonormalize,
    sort_eigenpairs,
    symmetric_eig_small,
)

# A locked Ritz value moving more than this triggers re-verification.
LOCK_DRIFT_TOL = 1e-12

# Ritz vectors are unit by construction; anything shorter signals a
# degenerate column (e.g. after subspace exhaustion) and is never locked.
_RITZ_NORM_GUARD = 1e-6

_BREAKDOWN_RETRIES = 3


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one thick-restart solve.

    ``nev`` counts desired eigenpairs without the degeneracy multiplicity
    in the dual variant.  ``tol`` is an absolute residual target (the
    shipped generators produce O(1) spectra; rescale inputs otherwise).
    """

    nev: int
    mwin: int
    m: int
    mode: str = "normal"
    tol: float = 1e-13
    max_restarts: int = 10000
    cg: CGConfig | None = None
    v1: str = "ones"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.nev <= self.mwin < self.m:
            raise ValueError("need 1 <= nev <= mwin < m")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.mode not in ("normal", "invert"):
            raise ValueError("mode must be 'normal' or 'invert'")
        if self.v1 not in ("ones", "random"):
            raise ValueError("v1 must be 'ones' or 'random'")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be at least 1")


def doubled_config(cfg: SolverConfig) -> SolverConfig:
    """Baseline configuration: (nev, mwin, m) doubled, rest unchanged."""
    return SolverConfig(
        nev=2 * cfg.nev, mwin=2 * cfg.mwin, m=2 * cfg.m,
        mode=cfg.mode, tol=cfg.tol, max_restarts=cfg.max_restarts,
        cg=cfg.cg, v1=cfg.v1, seed=cfg.seed,
    )


@dataclass(frozen=True)
class ConvergenceRecord:
    """Per-restart, per-target convergence snapshot."""

    restart: int
    cum_matvec: int
    target_index: int
    eig_estimate: float
    res_estimate: float
    res_true: float | None
    converged: bool


@dataclass
class EigenResult:
    """Converged eigenpairs and the run's convergence history.

    ``residuals[i]`` is a true residual when ``residual_is_estimate[i]``
    is False, otherwise the last available estimate (targets whose
    estimate never cleared the tolerance in a partial run).  ``partners``
    holds the reconstructed degenerate eigenvectors (dual variant only).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    partners: np.ndarray | None
    residuals: np.ndarray
    residual_is_estimate: np.ndarray
    n_restarts: int
    n_mv: int
    converged: bool
    records: list = field(default_factory=list)
    window_sizes: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    cg_iterations: int = 0


def dynamic_window(icnv: int, mwin: int, m: int) -> int:
    """Restart thickness: converged count plus the base window, capped."""
    return min(icnv + mwin, m - 1)


def residual_estimates(mode: str, lam, coupling, c: float | None = None):
    """Eigenvalue and residual-norm estimates from the projected data.

    Normal mode: the Ritz value itself and ``|coupling|``.  Invert mode:
    the projected matrix approximates the inverse, so the eigenvalue is
    the reciprocal and the residual picks up ``c = ||A v_{m+1}||``:
    ``c * |coupling / lam|``.
    """
    lam = np.asarray(lam, dtype=float)
    coupling = np.asarray(coupling, dtype=float)
    if mode == "normal":
        return lam.copy(), np.abs(coupling)
    if c is None:
        raise ValueError("invert mode needs c = ||A v_{m+1}||")
    with np.errstate(divide="ignore", invalid="ignore"):
        ev = 1.0 / lam
        res = c * np.abs(coupling * ev)
    return ev, res


def reconstruct_pair(j_op, x):
    """Degenerate partner ``y = J conj(x)`` of a unit eigenvector."""
    return j_op.apply_conj(x)


def _guarded_estimates(mode, lam_top, coupling_top, c_norm, notes, restart):
    """Estimates with a guard against non-positive inverse Ritz values."""
    ev, res_est = residual_estimates(mode, lam_top, coupling_top, c_norm)
    if mode == "invert":
        bad = np.asarray(lam_top) <= 0.0
        if np.any(bad):
            msg = f"non-positive inverse Ritz values at restart {restart}"
            if msg not in notes:
                notes.append(msg)
            res_est[bad] = np.inf
            ev[bad] = np.nan
    return ev, res_est


def trlan_jsym(op, j_op, cfg: SolverConfig, inspect=None) -> EigenResult:
    """Thick-restart solve in the dual-subspace (degeneracy-free) variant.

    ``op`` must be Hermitian and J-symmetric with respect to ``j_op``;
    invert mode additionally needs positive definiteness.  ``inspect``,
    if given, is called as ``inspect(event, payload)`` with event
    ``"extended"`` after each Lanczos extension and ``"compressed"``
    after each restart compression; payload arrays are live views, valid
    only during the call.
    """
    return _drive(op, j_op, cfg, inspect)


def trlan_standard(op, cfg: SolverConfig, inspect=None) -> EigenResult:
    """Thick-restart solve without the dual basis (classic baseline).

    Degenerate eigenvalues are reported as many times as they converge;
    use doubled parameters to capture both members of each pair.
    """
    return _drive(op, None, cfg, inspect)


def _start_vector(n: int, cfg: SolverConfig, rng) -> np.ndarray:
    if cfg.v1 == "ones":
        return np.ones(n, dtype=complex) / np.sqrt(n)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _extend_with_recovery(op, j_op, state, k, m, cg, rng, notes):
    """Lanczos extension with the breakdown replacement policy.

    On breakdown the missing basis vector is replaced by a random vector
    orthogonalized against the current bases (coupling stays zero).  If
    even random vectors are dependent the subspace is exhausted; a zero
    column is written and the remaining steps degenerate harmlessly.
    """
    cur = k
    while cur < m:
        try:
            if state.dual:
                lanczos_extend_jsym(op, j_op, state, cur, m, cg=cg)
            else:
                lanczos_extend_plain(op, state, cur, m, cg=cg)
            return
        except LanczosBreakdown as err:
            j = err.step
            bases = ((state.W[:, :j], state.V[:, :j]) if state.dual
                     else (state.V[:, :j],))
            q = None
            for _ in range(_BREAKDOWN_RETRIES):
                draw = rng.standard_normal(state.n) + 1j * rng.standard_normal(state.n)
                try:
                    q, _, _ = mgs_orthonormalize(draw, bases)
                    break
                except BreakdownError:
                    continue
            if q is None:
                q = np.zeros(state.n, dtype=complex)
                msg = f"search space exhausted at basis size {j}"
                if msg not in notes:
                    notes.append(msg)
            state.V[:, j] = q
            if state.dual:
                state.W[:, j] = j_op.apply_conj(q)
            cur = j


def _drive(op, j_op, cfg: SolverConfig, inspect) -> EigenResult:
    n = op.dim
    nev, mwin, m = cfg.nev, cfg.mwin, cfg.m
    dual = j_op is not None
    limit = n // 2 if dual else n
    if m > limit:
        raise ValueError(
            f"m={m} exceeds the exact-termination bound {limit} "
            f"({'n/2 for the dual variant' if dual else 'n'})"
        )
    if dual and j_op.dim != n:
        raise ValueError("operator and J dimensions differ")
    cg = cfg.cg
    if cfg.mode == "invert" and cg is None:
        cg = default_cg_config(cfg.tol)

    rng = np.random.default_rng(cfg.seed)
    cg_before = op.cg_iterations
    state = make_state(_start_vector(n, cfg, rng), m,
                       j_op=j_op if dual else None, mode=cfg.mode)

    # Per-column bookkeeping, aligned with the current decomposition.
    flags = np.zeros(m, dtype=bool)
    locked_lam = np.full(m, np.nan)
    locked_res = np.full(m, np.nan)

    records: list[ConvergenceRecord] = []
    window_sizes: list[int] = []
    notes: list[str] = []
    k = 0
    converged = False
    n_restarts = 0

    for restart in range(1, cfg.max_restarts + 1):
        n_restarts = restart
        _extend_with_recovery(op, j_op, state, k, m, cg, rng, notes)
        if inspect is not None:
            inspect("extended", {
                "restart": restart, "k": k, "m": m, "n_mv": state.n_mv,
                "V": state.V, "W": state.W, "tbar": state.tbar,
            })

        lam, z = symmetric_eig_small(state.tbar.symmetric_block(m))
        beta_last = state.tbar.t[m, m - 1]
        sort_eigenpairs(lam, z, "descending-value")

        # Carry convergence locks through the eigendecomposition.  A locked
        # column is exactly decoupled, so its eigenvector re-emerges as a
        # unit coordinate vector; match on that row.
        new_flags = np.zeros(m, dtype=bool)
        new_locked = np.full(m, np.nan)
        new_res = np.full(m, np.nan)
        drift = np.zeros(m, dtype=bool)
        for old in np.flatnonzero(flags):
            col = int(np.argmax(np.abs(z[old, :])))
            if abs(z[old, col]) < 0.9:
                notes.append(f"lost lock on column {old} at restart {restart}")
                continue
            new_flags[col] = True
            new_locked[col] = locked_lam[old]
            new_res[col] = locked_res[old]
            drift[col] = abs(lam[col] - locked_lam[old]) > LOCK_DRIFT_TOL
        flags, locked_lam, locked_res = new_flags, new_locked, new_res

        coupling = beta_last * z[m - 1, :]
        ritz = state.V[:, :m] @ z
        boundary = state.V[:, m].copy()

        if cfg.mode == "invert":
            c_norm = float(np.linalg.norm(op.apply(boundary)))
            state.n_mv += 1
        else:
            c_norm = None
        ev_val, res_est_val = _guarded_estimates(
            cfg.mode, lam[:nev], coupling[:nev], c_norm, notes, restart)

        # True residuals, computed only when the estimate clears the
        # tolerance (or a locked value drifted).  Uncounted applications.
        res_true_col = np.full(m, np.nan)
        for i in range(nev):
            if flags[i] and not drift[i]:
                continue
            if res_est_val[i] < cfg.tol or flags[i]:
                x = ritz[:, i]
                r = op.apply(x, count=False) - ev_val[i] * x
                rnorm = float(np.linalg.norm(r))
                res_true_col[i] = rnorm
                ok = rnorm < cfg.tol and abs(np.linalg.norm(x) - 1.0) < _RITZ_NORM_GUARD
                if flags[i] and not ok:
                    notes.append(f"re-verification failed for target {i + 1} "
                                 f"at restart {restart}")
                flags[i] = ok
                if ok:
                    locked_lam[i] = lam[i]
                    locked_res[i] = rnorm
                else:
                    locked_lam[i] = np.nan
                    locked_res[i] = np.nan

        # Converged pairs move to the top (stable).  A locked pair can sit
        # below position nev in value order when unconverged Ritz values
        # intrude between degenerate copies; this sort pulls it back into
        # the reported block, so reporting happens after it.
        order = np.argsort(~flags, kind="stable")
        lam = lam[order]
        ritz = ritz[:, order]
        coupling = coupling[order]
        flags = flags[order]
        locked_lam = locked_lam[order]
        locked_res = locked_res[order]
        res_true_col = res_true_col[order]

        ev, res_est = _guarded_estimates(
            cfg.mode, lam[:nev], coupling[:nev], c_norm, notes, restart)
        coupling[flags] = 0.0  # decouple the converged subspace
        icnv = int(np.sum(flags[:nev]))

        res_report = np.empty(nev)
        res_true_now = [None] * nev
        for i in range(nev):
            if not np.isnan(res_true_col[i]):
                res_true_now[i] = float(res_true_col[i])
            if flags[i]:
                res_report[i] = locked_res[i]
            elif res_true_now[i] is not None:
                res_report[i] = res_true_now[i]
            else:
                res_report[i] = res_est[i]
            records.append(ConvergenceRecord(
                restart=restart, cum_matvec=state.n_mv, target_index=i + 1,
                eig_estimate=float(ev[i]), res_estimate=float(res_est[i]),
                res_true=res_true_now[i], converged=bool(flags[i]),
            ))

        if icnv == nev:
            converged = True
            break
        if restart == cfg.max_restarts:
            break

        # Shrink the decomposition to thickness k and continue.
        k = dynamic_window(icnv, mwin, m)
        window_sizes.append(k)
        state.tbar.reset()
        t = state.tbar.t
        for i in range(k):
            t[i, i] = lam[i]
            t[k, i] = coupling[i]
        state.tbar.ncols = k
        state.V[:, :k] = ritz[:, :k]
        state.V[:, k] = boundary
        if dual:
            for i in range(k + 1):
                state.W[:, i] = j_op.apply_conj(state.V[:, i])
        flags[k:] = False
        locked_lam[k:] = np.nan
        locked_res[k:] = np.nan
        if inspect is not None:
            inspect("compressed", {
                "restart": restart, "k": k, "n_mv": state.n_mv,
                "V": state.V, "W": state.W, "tbar": state.tbar,
            })

    if not converged:
        notes.append(f"stopped after {n_restarts} restarts with "
                     f"{int(np.sum(flags[:nev]))}/{nev} pairs converged")
        for note in notes:
            warnings.warn(note, RuntimeWarning, stacklevel=2)

    vectors = ritz[:, :nev].copy()
    partners = None
    if dual:
        partners = np.column_stack([
            reconstruct_pair(j_op, vectors[:, i]) for i in range(nev)
        ])
    return EigenResult(
        eigenvalues=np.asarray(ev, dtype=float).copy(),
        eigenvectors=vectors,
        partners=partners,
        residuals=res_report.copy(),
        residual_is_estimate=~flags[:nev].copy(),
        n_restarts=n_restarts,
        n_mv=state.n_mv,
        converged=converged,
        records=records,
        window_sizes=window_sizes,
        warnings=notes,
        cg_iterations=op.cg_iterations - cg_before,
    )
