"""Dense real-matrix kernel used by the rest of the package.

Matrices are plain ``numpy.ndarray`` objects. The ``as_*`` helpers validate
shape and finiteness at the boundaries; everything else assumes validated
input.
"""
import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite, SolverError, UsageError

# Relative pivot floor for declaring a matrix not positive definite.
PIVOT_RTOL = 1e-12
# Diagonal regularization (relative to the trace) for near-singular systems.
REGULARIZATION = 1e-10


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float array or raise :class:`UsageError`."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise UsageError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise UsageError(f"{name} contains non-finite entries")
    return a


def as_symmetric(a, name="matrix"):
    """Return ``a`` as a finite square array with exact entrywise symmetry."""
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise UsageError(f"{name} must be square, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise UsageError(f"{name} is not exactly symmetric")
    return a


def mat_mul(a, b):
    a = as_matrix(a, "left operand")
    b = as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise UsageError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def inf_norm(a):
    """Largest absolute entry of ``a`` (elementwise max norm)."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a)))


def cholesky(s):
    """Lower-triangular ``L`` with ``L @ L.T == s``.

    Raises :class:`NotPositiveDefinite` when a pivot falls below
    ``1e-12 * trace(s) / dim``.
    """
    s = as_symmetric(s)
    dim = s.shape[0]
    floor = PIVOT_RTOL * max(np.trace(s) / dim, 0.0)
    try:
        lower = scipy.linalg.cholesky(s, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(lower) ** 2
    if np.any(pivots <= floor) or floor == 0.0:
        raise NotPositiveDefinite(f"smallest pivot {pivots.min():.3e} below {floor:.3e}")
    return lower


def min_eigenvalue(s, tol=1e-8):
    """Smallest eigenvalue of a symmetric matrix."""
    if tol <= 0:
        raise UsageError("tol must be positive")
    s = as_symmetric(s)
    try:
        return float(scipy.linalg.eigvalsh(s, subset_by_index=[0, 0], check_finite=False)[0])
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigenvalue iteration did not converge: {exc}") from None


def solve_spd(s, rhs):
    """Solve ``s @ x = rhs`` for symmetric positive definite ``s``."""
    lower = cholesky(s)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != lower.shape[0]:
        raise UsageError(f"rhs has {rhs.shape[0]} rows, system has {lower.shape[0]}")
    return scipy.linalg.cho_solve((lower, True), rhs, check_finite=False)


def factor_spd(m):
    """Factor an SPD system matrix for repeated solves.

    Used for interior-point normal equations, which become badly scaled
    near the optimum. A plain factorization is tried first; if it breaks
    down, ``1e-10 * trace`` is added to the diagonal and the factorization
    retried once. Returns a callable ``solve(rhs)``.
    """
    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        shift = REGULARIZATION * max(np.trace(m), 1.0)
        try:
            factor = scipy.linalg.cho_factor(
                m + shift * np.eye(m.shape[0]), lower=True, check_finite=False
            )
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"normal matrix not factorizable: {exc}") from None

    def solve(rhs):
        return scipy.linalg.cho_solve(factor, rhs, check_finite=False)

    return solve
