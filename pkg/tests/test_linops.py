import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gframe_lab import linops
from gframe_lab.errors import NotHermitian, NotPositive, NotSquare, ShapeMismatch

from conftest import random_hermitian


def test_eigh_identity():
    lam, V = linops.hermitian_eigendecomposition(np.eye(3))
    np.testing.assert_allclose(lam, [1, 1, 1])
    np.testing.assert_allclose(V.conj().T @ V, np.eye(3), atol=1e-14)


def test_eigh_diagonal_sorted():
    lam, _ = linops.hermitian_eigendecomposition(np.diag([6.0, 1.0]))
    np.testing.assert_allclose(lam, [1.0, 6.0])


def test_eigh_reconstruction(rng):
    M = random_hermitian(rng, 5)
    lam, V = linops.hermitian_eigendecomposition(M)
    assert np.all(np.diff(lam) >= 0)
    assert linops.operator_norm(V @ np.diag(lam) @ V.conj().T - M) <= 1e-12 * linops.operator_norm(M)
    assert linops.operator_norm(V.conj().T @ V - np.eye(5)) <= linops.EIG_TOL


def test_eigh_rejects_non_hermitian_and_non_square():
    with pytest.raises(NotHermitian):
        linops.hermitian_eigendecomposition([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NotSquare):
        linops.hermitian_eigendecomposition(np.ones((2, 3)))


def test_psd_sqrt_simple_cases():
    np.testing.assert_allclose(linops.psd_function(np.eye(3), "sqrt"), np.eye(3))
    np.testing.assert_allclose(linops.psd_function(np.diag([4.0, 9.0]), "sqrt"), np.diag([2.0, 3.0]), atol=1e-15)


def test_psd_inv_sqrt_multiplicative_oracle(rng):
    M = random_hermitian(rng, 6, cond=1e4)
    R = linops.psd_function(M, "inv_sqrt")
    assert linops.operator_norm(R @ M @ R - np.eye(6)) <= 1e-10


def test_psd_inv_matches_inverse(rng):
    M = random_hermitian(rng, 4, cond=50)
    np.testing.assert_allclose(linops.psd_function(M, "inv") @ M, np.eye(4), atol=1e-12)


def test_psd_floor_errors():
    with pytest.raises(NotPositive):
        linops.psd_function(np.diag([1.0, 0.0]), "inv")
    with pytest.raises(NotPositive):
        linops.psd_function(np.diag([1.0, -1.0]), "sqrt")
    # singular PSD is fine for sqrt
    np.testing.assert_allclose(linops.psd_function(np.diag([4.0, 0.0]), "sqrt"), np.diag([2.0, 0.0]))
    with pytest.raises(ValueError):
        linops.psd_function(np.eye(2), "log")


def test_pinv_cases():
    np.testing.assert_allclose(linops.pseudo_inverse(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(linops.pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_pinv_penrose_conditions(rng):
    M = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    res = linops.penrose_residuals(M, linops.pseudo_inverse(M))
    assert max(res) <= 1e-10


def test_pinv_of_invertible_is_inverse(rng):
    M = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    cond = np.linalg.cond(M)
    err = linops.operator_norm(linops.pseudo_inverse(M) - np.linalg.inv(M))
    assert err <= linops.PINV_TOL * cond


def test_operator_norm_cases():
    assert linops.operator_norm(np.eye(4)) == pytest.approx(1.0)
    assert linops.operator_norm(np.diag([np.sqrt(6), 1.0])) == pytest.approx(np.sqrt(6))


def test_operator_norm_sampling_lower_bound(rng):
    # in C^2 a random unit vector lands within 5% of the top singular
    # direction with probability about 0.1, so 100 draws essentially always hit
    M = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    F = rng.standard_normal((100, 2)) + 1j * rng.standard_normal((100, 2))
    F /= np.linalg.norm(F, axis=1, keepdims=True)
    sampled = max(np.linalg.norm(M @ f) for f in F)
    nrm = linops.operator_norm(M)
    assert sampled <= nrm * (1 + 1e-12)
    assert sampled >= 0.95 * nrm


def test_commutator_norm():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert linops.commutator_norm(np.eye(2), M) == 0.0
    assert linops.commutator_norm(np.diag([1.0, 5.0]), np.diag([2.0, -1.0])) == 0.0
    # AB - BA = [[0, 2], [0, 0]] - [[0, 1], [0, 0]] = [[0, 1], [0, 0]]
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.diag([1.0, 2.0])
    assert linops.commutator_norm(A, B) == pytest.approx(1.0)
    with pytest.raises(ShapeMismatch):
        linops.commutator_norm(np.eye(2), np.eye(3))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        linops.as_matrix([[np.nan, 0.0], [0.0, 1.0]])


def _complex_matrix(n):
    entries = st.floats(-10, 10, allow_nan=False)
    return st.lists(entries, min_size=2 * n * n, max_size=2 * n * n).map(
        lambda xs: (np.array(xs[: n * n]) + 1j * np.array(xs[n * n:])).reshape(n, n)
    )


@settings(max_examples=60, deadline=None)
@given(_complex_matrix(3), _complex_matrix(3))
def test_norm_submultiplicative(A, B):
    assert linops.operator_norm(A @ B) <= linops.operator_norm(A) * linops.operator_norm(B) + 1e-12


@settings(max_examples=60, deadline=None)
@given(_complex_matrix(4))
def test_sqrt_of_gram_squares_back(X):
    M = X @ X.conj().T
    R = linops.psd_function(M, "sqrt")
    scale = max(linops.operator_norm(M), 1.0)
    assert linops.hermitian_defect(R) <= 1e-12 * scale
    assert np.linalg.eigvalsh(linops.hermitian_part(R))[0] >= -1e-7 * np.sqrt(scale)
    assert linops.operator_norm(R @ R - M) <= 1e-10 * scale


@settings(max_examples=60, deadline=None)
@given(_complex_matrix(4))
def test_eigendecomposition_reassembles(X):
    M = X + X.conj().T
    lam, V = linops.hermitian_eigendecomposition(M)
    assert linops.operator_norm((V * lam) @ V.conj().T - M) <= linops.EIG_TOL * max(linops.operator_norm(M), 1.0)
