import json

import numpy as np
import pytest

from trljsym.mmio import (
    j_operator_from_meta,
    load_dense_operator,
    load_matrix,
    save_matrix,
    save_planted,
    sidecar_path,
)
from trljsym.operators import CanonicalBlockJ, SpinTensorJ


def test_round_trip_with_sidecar(tmp_path, planted_cache):
    p = planted_cache(10, 0)
    path = tmp_path / "m.mtx"
    save_planted(path, p)
    assert sidecar_path(path).exists()
    matrix, meta = load_matrix(path)
    assert matrix.shape == (20, 20)
    assert np.max(np.abs(matrix - p.matrix)) <= 1e-14
    assert meta["j_realization"] == "canonical-block"
    assert meta["seed"] == 0
    assert np.allclose(meta["planted_eigenvalues"], p.eigenvalues, atol=1e-15)


def test_matrix_market_header(tmp_path, planted_cache):
    p = planted_cache(10, 0)
    path = tmp_path / "m.mtx"
    save_planted(path, p)
    first = path.read_text().splitlines()[0]
    assert first.startswith("%%MatrixMarket matrix array complex general")


def test_load_dense_operator_builds_j(tmp_path, planted_cache):
    p = planted_cache(10, 0)
    path = tmp_path / "m.mtx"
    save_planted(path, p)
    op, j_op, meta = load_dense_operator(path)
    assert op.dim == 20
    assert isinstance(j_op, CanonicalBlockJ)
    v = np.ones(20, dtype=complex)
    assert np.allclose(op.apply(v), p.matrix @ v, atol=1e-12)


def test_spin_tensor_sidecar(tmp_path, tek_cache):
    a_op, j_ref, _ = tek_cache(6, 0)
    path = tmp_path / "tek.mtx"
    save_matrix(path, a_op.as_matrix(), j_realization="spin-tensor",
                seed=0, extra={"kappa": 0.19})
    op, j_op, meta = load_dense_operator(path)
    assert isinstance(j_op, SpinTensorJ)
    assert op.dim == 24
    assert meta["kappa"] == 0.19
    assert np.array_equal(j_op.matrix(), j_ref.matrix())


def test_missing_sidecar_gives_empty_meta(tmp_path):
    path = tmp_path / "bare.mtx"
    save_matrix(path, np.eye(4, dtype=complex))
    sidecar_path(path).unlink()
    matrix, meta = load_matrix(path)
    assert meta == {}
    op, j_op, _ = load_dense_operator(path)
    assert j_op is None


def test_rejects_unknown_realization(tmp_path):
    with pytest.raises(ValueError):
        save_matrix(tmp_path / "x.mtx", np.eye(2, dtype=complex),
                    j_realization="mystery")
    assert j_operator_from_meta(4, {}) is None
    with pytest.raises(ValueError):
        j_operator_from_meta(4, {"j_realization": "mystery"})
    with pytest.raises(ValueError):
        j_operator_from_meta(6, {"j_realization": "spin-tensor"})


def test_sidecar_is_json(tmp_path, planted_cache):
    p = planted_cache(10, 0)
    path = tmp_path / "m.mtx"
    save_planted(path, p)
    with open(sidecar_path(path)) as fh:
        meta = json.load(fh)
    assert meta["dim"] == 20
