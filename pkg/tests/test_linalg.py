import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from simule.errors import NotPositiveDefinite, UsageError
from simule.linalg import (as_symmetric, cholesky, factor_spd, inf_norm, mat_mul,
                           min_eigenvalue, solve_spd)


def test_mat_mul_examples():
    m = np.arange(9.0).reshape(3, 3)
    assert np.array_equal(mat_mul(np.eye(3), m), m)
    assert np.array_equal(mat_mul([[1, 2], [3, 4]], [[1], [1]]), [[3], [7]])
    with pytest.raises(UsageError):
        mat_mul(np.ones((2, 3)), np.ones((2, 2)))


def test_inf_norm_examples():
    assert inf_norm(np.zeros((3, 3))) == 0
    assert inf_norm([[1, -5], [2, 3]]) == 5
    assert inf_norm(np.eye(4)) == 1


def test_cholesky_examples():
    assert np.array_equal(cholesky(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(cholesky([[4.0, 2.0], [2.0, 2.0]]), [[2, 0], [1, 1]], atol=1e-15)
    with pytest.raises(NotPositiveDefinite):
        cholesky([[1.0, 2.0], [2.0, 1.0]])


def test_cholesky_rejects_asymmetric():
    with pytest.raises(UsageError):
        cholesky([[1.0, 0.1], [0.0, 1.0]])


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.eye(3), tol=1e-8) == pytest.approx(1.0)
    assert min_eigenvalue(np.diag([3.0, -2.0]), tol=1e-8) == pytest.approx(-2.0)
    assert min_eigenvalue([[1.0, 2.0], [2.0, 1.0]]) == pytest.approx(-1.0)


def test_solve_spd_examples():
    b = np.array([1.0, -2.0, 3.0])
    np.testing.assert_allclose(solve_spd(np.eye(3), b), b)
    np.testing.assert_allclose(solve_spd([[4.0, 2.0], [2.0, 2.0]], [2.0, 2.0]), [0, 1], atol=1e-15)
    with pytest.raises(NotPositiveDefinite):
        solve_spd([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0])


def test_factor_spd_regularizes_singular():
    solve = factor_spd(np.array([[1.0, 1.0], [1.0, 1.0]]))
    x = solve(np.array([2.0, 2.0]))
    np.testing.assert_allclose(x.sum(), 2.0, rtol=1e-6)


def test_as_symmetric_requires_exact_symmetry():
    with pytest.raises(UsageError):
        as_symmetric(np.ones((2, 3)))
    with pytest.raises(UsageError):
        as_symmetric([[np.nan, 0], [0, 1]])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (5, 5), elements=st.floats(-3, 3)))
def test_cholesky_reconstructs_spd(a):
    s = a @ a.T + 5 * np.eye(5)
    s = (s + s.T) / 2
    lower = cholesky(s)
    assert np.allclose(np.triu(lower, 1), 0)
    np.testing.assert_allclose(lower @ lower.T, s, atol=1e-9)
    assert min_eigenvalue(s) == pytest.approx(np.linalg.eigvalsh(s)[0], abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-3, 3)),
       arrays(np.float64, (4,), elements=st.floats(-10, 10)))
def test_solve_spd_residual(a, b):
    s = a @ a.T + np.eye(4)
    s = (s + s.T) / 2
    x = solve_spd(s, b)
    np.testing.assert_allclose(s @ x, b, atol=1e-8 * (1 + np.abs(b).max()))
