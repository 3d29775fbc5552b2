import numpy as np
import pytest

from twistk.affine import (LevelWeight, gram_matrix, h_boson, h_boson_sum,
                           orthonormal_basis)

ALL_MODULES = [(k, tj) for k in (1, 2, 3) for tj in range(k + 1)]


def test_level_weight_validation():
    with pytest.raises(ValueError):
        LevelWeight(0, 0)
    with pytest.raises(ValueError):
        LevelWeight(2, 3)


@pytest.mark.parametrize("k,two_j0", ALL_MODULES)
def test_gram_positive_semidefinite(k, two_j0):
    lw = LevelWeight(k, two_j0)
    for grade in range(5):
        gm = gram_matrix(lw, grade)
        lam = np.linalg.eigvalsh((gm + gm.conj().T) / 2)
        assert lam.min() >= -1e-9 * max(lam.max(), 1.0)


@pytest.mark.parametrize("k,two_j0", ALL_MODULES)
def test_graded_dims_stable_across_null_tol(k, two_j0):
    dims = set()
    for tol in (1e-10, 1e-8, 1e-6):
        b = orthonormal_basis(LevelWeight(k, two_j0), 4, null_tol=tol)
        dims.add(tuple(b.dims[g] for g in range(5)))
    assert len(dims) == 1


def test_golden_graded_dims():
    b = orthonormal_basis(LevelWeight(1, 0), 4)
    assert dict(b.dims) == {0: 1, 1: 3, 2: 4, 3: 7, 4: 13}
    b = orthonormal_basis(LevelWeight(2, 1), 4)
    assert dict(b.dims) == {0: 2, 1: 6, 2: 12, 3: 26, 4: 48}


@pytest.mark.parametrize("k,two_j0", [(1, 0), (2, 1), (3, 3)])
def test_energy_matches_casimir_sum_oracle(k, two_j0):
    basis = orthonormal_basis(LevelWeight(k, two_j0), 3)
    diag = h_boson(basis).matrix
    oracle = h_boson_sum(basis).matrix
    assert np.abs(diag - oracle).max() < 1e-9


def test_null_tol_outside_supported_range_rejected():
    with pytest.raises(ValueError):
        orthonormal_basis(LevelWeight(1, 0), 2, null_tol=1e-2)
