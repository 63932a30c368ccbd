"""Matrix Market persistence with a JSON metadata sidecar.

Dense complex matrices are written in Matrix Market array format
(complex, general) through scipy; the sidecar ``<path>.json`` records the
J realization ("canonical-block" or "spin-tensor"), the generator seed,
and planted eigenvalues when known, so a matrix file round-trips into an
operator/J pair.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.io

from .operators import CanonicalBlockJ, DenseOperator, SpinTensorJ
from .randmat import PlantedSpectrumMatrix
from .tek import gamma_algebra

J_REALIZATIONS = ("canonical-block", "spin-tensor")


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def save_matrix(path, matrix, j_realization=None, seed=None,
                planted_eigenvalues=None, extra=None):
    """Write a dense complex matrix plus its metadata sidecar."""
    path = Path(path)
    if j_realization is not None and j_realization not in J_REALIZATIONS:
        raise ValueError(f"j_realization must be one of {J_REALIZATIONS}")
    matrix = np.asarray(matrix, dtype=complex)
    scipy.io.mmwrite(str(path), matrix, field="complex", symmetry="general")
    meta = {"format": "matrix-market-array", "dim": int(matrix.shape[0])}
    if j_realization is not None:
        meta["j_realization"] = j_realization
    if seed is not None:
        meta["seed"] = int(seed)
    if planted_eigenvalues is not None:
        meta["planted_eigenvalues"] = [float(x) for x in planted_eigenvalues]
    if extra:
        meta.update(extra)
    with open(sidecar_path(path), "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def save_planted(path, planted: PlantedSpectrumMatrix):
    """Persist a generated planted-spectrum matrix with its provenance."""
    return save_matrix(
        path, planted.matrix,
        j_realization=planted.j_realization,
        seed=planted.seed,
        planted_eigenvalues=planted.eigenvalues,
    )


def load_matrix(path):
    """Read a matrix and its sidecar; returns ``(matrix, meta)``."""
    path = Path(path)
    matrix = np.asarray(scipy.io.mmread(str(path)), dtype=complex)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        with open(side) as fh:
            meta = json.load(fh)
    return matrix, meta


def j_operator_from_meta(dim: int, meta: dict):
    """Build the J realization named in the sidecar (None if absent)."""
    name = meta.get("j_realization")
    if name is None:
        return None
    if name == "canonical-block":
        return CanonicalBlockJ(dim)
    if name == "spin-tensor":
        if dim % 4 != 0:
            raise ValueError("spin-tensor J needs a dimension divisible by 4")
        return SpinTensorJ(dim // 4, gamma_algebra().j_spin)
    raise ValueError(f"unknown J realization {name!r}")


def load_dense_operator(path):
    """Load a matrix file as ``(DenseOperator, JOperator | None, meta)``."""
    matrix, meta = load_matrix(path)
    op = DenseOperator(matrix)
    return op, j_operator_from_meta(op.dim, meta), meta
