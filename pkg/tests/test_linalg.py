import numpy as np
import pytest
import scipy.sparse as sps
from hypothesis import given, settings
from hypothesis import strategies as st

from helmbench.linalg import (
    ConvergenceError,
    SingularMatrixError,
    SparseLU,
    csr_to_dense,
    gmres,
    lu_factor,
    lu_solve,
    to_csr,
)


def test_lu_identity():
    b = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(lu_solve(np.eye(3), b), b)


def test_lu_diagonal_complex():
    x = lu_solve(np.diag([2.0, 1j]), np.array([2.0, 1j]))
    assert np.allclose(x, [1.0, 1.0], atol=1e-15)


def test_lu_random_complex_residual():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50)) + 10 * np.eye(50)
    b = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    x = lu_solve(A, b)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=25), st.integers(min_value=0, max_value=10_000))
def test_lu_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + n * np.eye(n)
    b = rng.standard_normal(n)
    F = lu_factor(A)
    assert np.allclose(F.solve(b), np.linalg.solve(A, b), rtol=1e-9, atol=1e-12)
    assert F.pivot_growth >= 1.0 - 1e-12


def test_lu_pivoting_needed():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(lu_solve(A, np.array([2.0, 3.0])), [3.0, 2.0])


def test_lu_singular():
    with pytest.raises(SingularMatrixError):
        lu_factor(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularMatrixError):
        lu_factor(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        lu_factor(np.ones((2, 3)))


def test_to_csr_sums_duplicates():
    A = to_csr([0, 0, 1, 1], [0, 0, 1, 0], [1.0, 2.0, 5.0, 0.0], (2, 2))
    assert np.array_equal(csr_to_dense(A), [[3.0, 0.0], [0.0, 5.0]])
    assert A.nnz == 2


def test_sparse_lu_real_matrix_complex_rhs():
    A = sps.diags([2.0, 4.0, 8.0]).tocsr()
    x = SparseLU(A).solve(np.array([2 + 2j, 4j, 8.0]))
    assert np.allclose(x, [1 + 1j, 1j, 1.0])


def test_sparse_lu_singular():
    with pytest.raises(SingularMatrixError):
        SparseLU(sps.csr_matrix(np.array([[1.0, 1.0], [1.0, 1.0]])))


def test_gmres_identity_one_iteration():
    b = np.array([1.0, 2.0, 3.0j])
    x, st_ = gmres(lambda v: v, b, tol=1e-12)
    assert st_.converged and st_.iterations == 1
    assert np.allclose(x, b)


def test_gmres_three_eigenvalues():
    d = np.repeat([1.0, 2.0 + 1j, -3.0], 20)
    b = np.random.default_rng(3).standard_normal(60)
    x, st_ = gmres(lambda v: d * v, b, tol=1e-12)
    assert st_.converged and st_.iterations <= 3
    assert np.linalg.norm(d * x - b) <= 1e-12 * np.linalg.norm(b)


def test_gmres_exact_preconditioner():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
    Ainv = np.linalg.inv(A)
    b = rng.standard_normal(30)
    x, st_ = gmres(lambda v: A @ v, b, tol=1e-10, precond=lambda v: Ainv @ v)
    assert st_.iterations == 1 and st_.converged
    assert np.linalg.norm(A @ x - b) <= 1e-10 * np.linalg.norm(b)


def test_gmres_restarts_and_history():
    rng = np.random.default_rng(5)
    n = 80
    A = np.eye(n) * 4 + rng.standard_normal((n, n)) / np.sqrt(n)
    b = rng.standard_normal(n)
    x, st_ = gmres(lambda v: A @ v, b, restart=5, tol=1e-10, maxit=500)
    assert st_.converged and st_.restarts > 1
    assert np.linalg.norm(A @ x - b) <= 1e-9 * np.linalg.norm(b)
    assert st_.history[0] == pytest.approx(1.0)


def test_gmres_zero_rhs():
    x, st_ = gmres(lambda v: 2 * v, np.zeros(4))
    assert st_.converged and np.all(x == 0)


def test_gmres_failure_raises():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((40, 40))
    with pytest.raises(ConvergenceError) as info:
        gmres(lambda v: A @ v, rng.standard_normal(40), restart=2, maxit=4, tol=1e-14, raise_on_failure=True)
    assert not info.value.stats.converged


def test_gmres_nan_detected():
    with pytest.raises(FloatingPointError):
        gmres(lambda v: v * np.nan, np.ones(3))
