"""Thick-restart Lanczos eigensolvers for Hermitian J-symmetric matrices.

Such matrices have a doubly degenerate spectrum with partner eigenvectors
related by ``y = J conj(x)``.  The dual-subspace solver exploits this to
find each eigenvalue once and reconstruct the partner; the standard
thick-restart solver is included as the baseline for cost comparisons.
"""

from .cg import CGConfig, CGError, CGReport, cg_solve, default_cg_config
from .harness import (
    ComparisonReport,
    ExperimentSpec,
    emit_convergence_csv,
    read_convergence_csv,
    run_experiment,
    verify_against_oracle,
)
from .lanczos import (
    KrylovState,
    LanczosBreakdown,
    lanczos_extend_jsym,
    lanczos_extend_plain,
    make_state,
)
from .linalg import (
    BreakdownError,
    ProjectedMatrix,
    hermitian_eig,
    mgs_orthonormalize,
    sort_eigenpairs,
    symmetric_eig_small,
)
from .mmio import load_dense_operator, load_matrix, save_matrix, save_planted
from .operators import (
    CanonicalBlockJ,
    DenseOperator,
    DimensionMismatch,
    JOperator,
    LinearOperator,
    SpinTensorJ,
)
from .randmat import (
    PlantedSpectrumMatrix,
    gen_random_hjs,
    gen_random_real_orthogonal,
)
from .solver import (
    ConvergenceRecord,
    EigenResult,
    SolverConfig,
    doubled_config,
    dynamic_window,
    reconstruct_pair,
    trlan_jsym,
    trlan_standard,
)
from .tek import (
    GammaAlgebra,
    WilsonDiracOperator,
    build_A_from_D,
    build_wilson_dirac,
    gamma_algebra,
    operator_dim,
    random_tek_operator,
    su_adjoint_dim,
)

__version__ = "0.1.0"

__all__ = [
    "BreakdownError", "CGConfig", "CGError", "CGReport", "CanonicalBlockJ",
    "ComparisonReport", "ConvergenceRecord", "DenseOperator",
    "DimensionMismatch", "EigenResult", "ExperimentSpec", "GammaAlgebra",
    "JOperator", "KrylovState", "LanczosBreakdown", "LinearOperator",
    "PlantedSpectrumMatrix", "ProjectedMatrix", "SolverConfig", "SpinTensorJ",
    "WilsonDiracOperator", "build_A_from_D", "build_wilson_dirac", "cg_solve",
    "default_cg_config", "doubled_config", "dynamic_window",
    "emit_convergence_csv", "gamma_algebra", "gen_random_hjs",
    "gen_random_real_orthogonal", "hermitian_eig", "lanczos_extend_jsym",
    "lanczos_extend_plain", "load_dense_operator", "load_matrix",
    "make_state", "mgs_orthonormalize", "operator_dim", "random_tek_operator",
    "read_convergence_csv", "reconstruct_pair", "run_experiment",
    "save_matrix", "save_planted", "sort_eigenpairs", "su_adjoint_dim",
    "symmetric_eig_small", "trlan_jsym", "trlan_standard",
    "verify_against_oracle",
]
