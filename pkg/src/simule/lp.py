"""Dense linear programs ``min c'x  s.t.  G x <= h``.

The solver is an infeasible-start primal-dual interior-point method with
Mehrotra predictor-corrector steps. The constraint matrix enters only
through an operator exposing ``matvec``, ``rmatvec`` and
``normal_solver(w)`` (a factorization of ``G' diag(w) G``), so structured
problems can supply a cheaper normal-equation solve while sharing the same
iteration.
"""
import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, UsageError
from .linalg import as_matrix, factor_spd


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = 1e-7
    gap_tol: float = 1e-7
    max_iters: int = 200
    step_fraction: float = 0.99

    def __post_init__(self):
        if self.feasibility_tol <= 0 or self.gap_tol <= 0:
            raise UsageError("solver tolerances must be positive")
        if self.max_iters < 1:
            raise UsageError("max_iters must be at least 1")
        if not 0.0 < self.step_fraction < 1.0:
            raise UsageError("step_fraction must lie in (0, 1)")


class DenseInequalities:
    """Constraint operator backed by an explicit matrix."""

    def __init__(self, matrix):
        self.matrix = as_matrix(matrix, "inequality matrix")
        self.shape = self.matrix.shape

    def matvec(self, x):
        return self.matrix @ x

    def rmatvec(self, z):
        return self.matrix.T @ z

    def normal_solver(self, w):
        g = self.matrix
        return factor_spd(g.T @ (w[:, None] * g))

    def to_dense(self):
        return self.matrix


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    ineq: object
    ineq_rhs: np.ndarray

    def __post_init__(self):
        m, n = self.ineq.shape
        c = np.asarray(self.objective, dtype=float)
        h = np.asarray(self.ineq_rhs, dtype=float)
        if c.shape != (n,) or h.shape != (m,):
            raise UsageError(
                f"objective {c.shape} / rhs {h.shape} inconsistent with G {self.ineq.shape}"
            )
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(h))):
            raise UsageError("objective and rhs must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "ineq_rhs", h)

    @classmethod
    def from_dense(cls, objective, ineq_matrix, ineq_rhs):
        return cls(objective, DenseInequalities(ineq_matrix), ineq_rhs)

    @property
    def num_vars(self):
        return self.ineq.shape[1]

    @property
    def num_rows(self):
        return self.ineq.shape[0]

    @property
    def ineq_matrix(self):
        return self.ineq.to_dense()


@dataclass
class LPSolution:
    x: np.ndarray
    objective_value: float
    duality_gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    status: LPStatus
    z: np.ndarray = None


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _initial_point(prob):
    """Least-squares start shifted into the positive orthant (Mehrotra)."""
    op, c, h = prob.ineq, prob.objective, prob.ineq_rhs
    m = op.shape[0]
    solve = op.normal_solver(np.ones(m))
    x = solve(op.rmatvec(h))
    s = h - op.matvec(x)
    z = -op.matvec(solve(c))
    s = s + max(-1.5 * s.min(), 0.0)
    z = z + max(-1.5 * z.min(), 0.0)
    sz = float(s @ z)
    if sz <= 0.0 or not np.isfinite(sz):
        return x, np.ones(m), np.ones(m)
    s = s + 0.5 * sz / z.sum()
    z = z + 0.5 * sz / s.sum()
    return x, s, z


def _phase_one_value(prob, opts):
    """Optimal ``t`` of ``min t  s.t.  G x - t <= h, t >= -1``."""
    g = prob.ineq.to_dense()
    m, n = g.shape
    g1 = np.zeros((m + 1, n + 1))
    g1[:m, :n] = g
    g1[:m, n] = -1.0
    g1[m, n] = -1.0
    h1 = np.append(prob.ineq_rhs, 1.0)
    c1 = np.zeros(n + 1)
    c1[n] = 1.0
    sol = _interior_point(LinearProgram.from_dense(c1, g1, h1), opts)
    if sol.status is not LPStatus.OPTIMAL:
        return None
    return sol.objective_value


def solve_lp(prob: LinearProgram, opts: SolverOptions = None) -> LPSolution:
    """Solve ``prob``; infeasibility and iteration limits are reported as statuses."""
    opts = opts or SolverOptions()
    sol = _interior_point(prob, opts)
    if sol.status is LPStatus.ITERATION_LIMIT:
        t = _phase_one_value(prob, opts)
        if t is not None and t > opts.feasibility_tol:
            sol.status = LPStatus.INFEASIBLE
    return sol


def _interior_point(prob, opts):
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return _iterate(prob, opts)


def _iterate(prob, opts):
    op, c, h = prob.ineq, prob.objective, prob.ineq_rhs
    m, n = op.shape
    ftol, gtol, frac = opts.feasibility_tol, opts.gap_tol, opts.step_fraction
    c_scale = 1.0 + float(np.max(np.abs(c), initial=0.0))

    x, s, z = _initial_point(prob)
    status = LPStatus.ITERATION_LIMIT
    stalled = 0
    it = 0
    for it in range(1, opts.max_iters + 1):
        gx = op.matvec(x)
        rp = gx + s - h
        gtz = op.rmatvec(z)
        rd = gtz + c
        cx = float(c @ x)
        sz = float(s @ z)
        pres = float(np.max(np.abs(rp), initial=0.0))
        dres = float(np.max(np.abs(rd), initial=0.0))
        gap = sz / (1.0 + abs(cx))
        if pres <= ftol and dres <= ftol * c_scale and gap <= gtol:
            status = LPStatus.OPTIMAL
            break
        hz = float(h @ z)
        if hz < 0 and np.max(np.abs(gtz), initial=0.0) <= ftol * -hz:
            status = LPStatus.INFEASIBLE
            break
        if cx < 0 and np.max(np.abs(gx + s), initial=0.0) <= ftol * -cx:
            status = LPStatus.UNBOUNDED
            break
        # Complementarity is converged but the primal residual is not moving.
        if stalled >= 5 and sz <= gtol and pres > ftol:
            break

        w = z / s
        if not np.all(np.isfinite(w)):
            break
        try:
            solve = op.normal_solver(w)
        except NotPositiveDefinite:
            break
        mu = sz / m

        def direction(rc):
            dx = solve(-rd - op.rmatvec(w * rp - rc / s))
            gdx = op.matvec(dx)
            dz = w * (gdx + rp) - rc / s
            ds = -rp - gdx
            return dx, ds, dz

        dx, ds, dz = direction(s * z)
        ap = min(1.0, _max_step(s, ds))
        ad = min(1.0, _max_step(z, dz))
        mu_aff = float((s + ap * ds) @ (z + ad * dz)) / m
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        dx, ds, dz = direction(s * z + ds * dz - sigma * mu)

        ap = min(1.0, frac * _max_step(s, ds))
        ad = min(1.0, frac * _max_step(z, dz))
        if not (np.isfinite(ap) and np.isfinite(ad)) or not np.all(np.isfinite(dx)):
            break
        stalled = stalled + 1 if ap < 1e-8 else 0
        x = x + ap * dx
        s = s + ap * ds
        z = z + ad * dz

    gx = op.matvec(x)
    rp = gx + s - h
    rd = op.rmatvec(z) + c
    cx = float(c @ x)
    return LPSolution(
        x=x,
        objective_value=cx,
        duality_gap=float(s @ z) / (1.0 + abs(cx)),
        primal_residual=float(np.max(np.abs(rp), initial=0.0)),
        dual_residual=float(np.max(np.abs(rd), initial=0.0)),
        iterations=it,
        status=status,
        z=z,
    )


# Enumeration caps for the vertex oracle.
ORACLE_MAX_VARS = 4
ORACLE_MAX_ROWS = 12
_ORACLE_BOX = 1e6


def _enumerate_vertices(c, g, h, tol=1e-9):
    n = g.shape[1]
    best = np.inf
    for rows in itertools.combinations(range(g.shape[0]), n):
        sub = g[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, h[list(rows)])
        if np.all(g @ v <= h + tol * (1.0 + np.abs(h))):
            best = min(best, float(c @ v))
    return best


def brute_force_lp_oracle(prob: LinearProgram) -> float:
    """Optimal objective by vertex enumeration, for tiny problems.

    Returns ``+inf`` when infeasible and ``-inf`` when unbounded below. A
    large bounding box guarantees vertices exist; an objective that keeps
    falling when the box doubles marks the problem unbounded.
    """
    n, m = prob.num_vars, prob.num_rows
    if n > ORACLE_MAX_VARS or m > ORACLE_MAX_ROWS:
        raise UsageError(
            f"oracle limited to {ORACLE_MAX_VARS} vars / {ORACLE_MAX_ROWS} rows, got {n} / {m}"
        )
    g, h, c = prob.ineq_matrix, prob.ineq_rhs, prob.objective
    box = np.vstack([np.eye(n), -np.eye(n)])
    values = []
    for size in (_ORACLE_BOX, 2 * _ORACLE_BOX):
        gb = np.vstack([g, box])
        hb = np.concatenate([h, np.full(2 * n, size)])
        values.append(_enumerate_vertices(c, gb, hb))
    if np.isinf(values[0]):
        return np.inf
    if values[1] < values[0] - 1e-6 * (1.0 + abs(values[0])):
        return -np.inf
    return values[0]
