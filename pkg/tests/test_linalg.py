import numpy as np
import pytest

from twistk.linalg import (NonHermitianError, eigh, matrix_function,
                           null_space, sign_operator)


def random_hermitian(n, rng):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (m + m.conj().T) / 2


@pytest.mark.parametrize("n", [5, 50, 200, 500])
def test_eigh_reconstructs(n):
    rng = np.random.default_rng(n)
    m = random_hermitian(n, rng)
    lam, vec = eigh(m)
    back = (vec * lam) @ vec.conj().T
    rel = np.linalg.norm(back - m) / np.linalg.norm(m)
    assert rel < 1e-10


def test_eigh_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(NonHermitianError):
        eigh(m)


def test_null_space_dimension_stable_across_tol_decade():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    lam = np.array([0.0] * 3 + [1.0] * 9)  # gap of many decades at tol
    m = (q * lam) @ q.T
    dims = set()
    for tol in (1e-9, 1e-8):
        ker, info = null_space(m, tol=tol)
        assert not info["ambiguous"]
        dims.add(ker.shape[1])
    assert dims == {3}


def test_null_space_flags_ambiguous_cut():
    m = np.diag([1e-8, 1.0, 2.0])
    _, info = null_space(m, tol=1e-8)
    assert info["ambiguous"]


def test_matrix_function_identity():
    rng = np.random.default_rng(5)
    m = random_hermitian(30, rng)
    back = matrix_function(m, lambda x: x)
    assert np.abs(back - m).max() < 1e-12


def test_sign_operator_squares_to_identity():
    rng = np.random.default_rng(8)
    m = random_hermitian(20, rng) + 15.0 * np.eye(20)  # definitely positive
    s = sign_operator(m)
    assert np.abs(s @ s - np.eye(20)).max() < 1e-10
    assert np.abs(s - np.eye(20)).max() < 1e-10  # positive operator
