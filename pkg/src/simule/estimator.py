"""Joint estimation of shared and task-specific sparse precision matrices.

For every column ``j`` the estimator solves

    min  sum_i ||beta_i||_1 + eps*K ||beta_s||_1
    s.t. ||Sigma_i (beta_i + beta_s) - e_j||_inf <= lambda,   i = 1..K

as a linear program over ``theta = [beta_1; ...; beta_K; eps*K*beta_s]``
and slack bounds ``u >= |theta|``. Columns are independent and may be
farmed out to a process pool; results are assembled into fixed slots, so
the output does not depend on scheduling.
"""
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import covariance as cov
from .errors import DataError, EstimationError, UsageError
from .linalg import factor_spd
from .lp import LinearProgram, LPStatus, SolverOptions, solve_lp

GAUSSIAN = "gaussian"
NONPARANORMAL = "nonparanormal"


@dataclass(frozen=True)
class SimuleConfig:
    lambda_n: float
    epsilon: float = 0.5
    mode: str = GAUSSIAN
    intertwined: bool = False
    intertwined_alpha: float = 0.5
    workers: int = 1
    solver: SolverOptions = field(default_factory=SolverOptions)
    edge_threshold: float = 1e-5

    def __post_init__(self):
        if not self.lambda_n > 0:
            raise UsageError(f"lambda_n must be positive, got {self.lambda_n}")
        if not self.epsilon > 0:
            raise UsageError(f"epsilon must be positive, got {self.epsilon}")
        if self.epsilon == 1:
            raise UsageError(
                "epsilon must differ from 1: at epsilon = 1 the split into shared "
                "and individual parts is not unique"
            )
        if self.mode not in (GAUSSIAN, NONPARANORMAL):
            raise UsageError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.intertwined_alpha <= 1.0:
            raise UsageError("intertwined_alpha must lie in [0, 1]")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        if not self.edge_threshold > 0:
            raise UsageError("edge_threshold must be positive")


class ColumnConstraints:
    """Constraint operator of one column LP.

    Variables are ``[theta; u]`` with ``theta`` holding K individual blocks
    followed (when ``shared_scale`` is set) by one shared block. Rows are
    ``theta - u <= 0``, ``-theta - u <= 0``, ``A theta <= lam + b`` and
    ``-A theta <= lam - b`` where task ``i`` of ``A`` is
    ``[0 .. Sigma_i .. 0, shared_scale * Sigma_i]``.
    """

    def __init__(self, sigmas, shared_scale=None):
        self.sigmas = np.asarray(sigmas, dtype=float)
        self.k, self.p, _ = self.sigmas.shape
        self.scale = shared_scale
        self.blocks = self.k + (1 if shared_scale is not None else 0)
        self.nt = self.blocks * self.p
        self.nc = self.k * self.p
        self.shape = (2 * self.nt + 2 * self.nc, 2 * self.nt)

    def _a(self, theta):
        b = theta[:self.nc].reshape(self.k, self.p)
        if self.scale is not None:
            b = b + self.scale * theta[self.nc:]
        return np.einsum("kab,kb->ka", self.sigmas, b).ravel()

    def _at(self, v):
        v = v.reshape(self.k, self.p)
        sv = np.einsum("kab,kb->ka", self.sigmas, v)
        if self.scale is None:
            return sv.ravel()
        return np.concatenate([sv.ravel(), self.scale * sv.sum(axis=0)])

    def matvec(self, x):
        theta, u = x[:self.nt], x[self.nt:]
        a = self._a(theta)
        return np.concatenate([theta - u, -theta - u, a, -a])

    def rmatvec(self, z):
        nt, nc = self.nt, self.nc
        z1, z2 = z[:nt], z[nt:2 * nt]
        z3, z4 = z[2 * nt:2 * nt + nc], z[2 * nt + nc:]
        return np.concatenate([z1 - z2 + self._at(z3 - z4), -z1 - z2])

    def normal_solver(self, w):
        nt, nc, p = self.nt, self.nc, self.p
        w1, w2 = w[:nt], w[nt:2 * nt]
        v = (w[2 * nt:2 * nt + nc] + w[2 * nt + nc:]).reshape(self.k, p)
        d = w1 + w2
        e = w2 - w1
        h = np.zeros((nt, nt))
        shared = slice(nc, nt)
        for i in range(self.k):
            s = self.sigmas[i]
            block = (s * v[i]) @ s
            own = slice(i * p, (i + 1) * p)
            h[own, own] = block
            if self.scale is not None:
                h[own, shared] = self.scale * block
                h[shared, own] = self.scale * block
                h[shared, shared] += self.scale ** 2 * block
        h[np.diag_indices(nt)] += 4.0 * w1 * w2 / d
        solve_theta = factor_spd(h)

        def solve(rhs):
            r_theta, r_u = rhs[:nt], rhs[nt:]
            a = solve_theta(r_theta - e / d * r_u)
            return np.concatenate([a, (r_u - e * a) / d])

        return solve

    def to_dense(self):
        n = self.shape[1]
        return np.column_stack([self.matvec(col) for col in np.eye(n)])


@dataclass
class ColumnSolution:
    col_index: int
    beta_individual: np.ndarray
    beta_shared: Optional[np.ndarray]
    feasible: bool
    status: LPStatus
    iterations: int
    duality_gap: float
    primal_residual: float


@dataclass
class JointPrecisionEstimate:
    omega_shared: Optional[np.ndarray]
    omega_individual: List[np.ndarray]
    config: SimuleConfig
    infeasible_columns: List[int]
    columns: List[ColumnSolution] = field(default_factory=list, repr=False)

    @property
    def omega_total(self):
        if self.omega_shared is None:
            return list(self.omega_individual)
        return [self.omega_shared + oi for oi in self.omega_individual]

    @property
    def num_tasks(self):
        return len(self.omega_individual)


def lambda_from_alpha(alpha, k, p, n_tot):
    """Constraint radius ``alpha * sqrt(log(K p) / n_tot)``."""
    return alpha * math.sqrt(math.log(k * p) / n_tot)


def _as_sigma_stack(scatters):
    mats = [s.matrix if isinstance(s, cov.ScatterMatrix) else np.asarray(s, float)
            for s in scatters]
    if not mats:
        raise UsageError("need at least one scatter matrix")
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise UsageError(f"scatter matrices disagree in shape: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise UsageError(f"scatter matrices must be square, got {shape}")
    return np.stack(mats)


def _basis_rhs(k, p, j):
    b = np.zeros(k * p)
    b[j::p] = 1.0
    return b


def column_lp(sigmas, j, lam, shared_scale=None):
    op = ColumnConstraints(sigmas, shared_scale)
    if not 0 <= j < op.p:
        raise UsageError(f"column index {j} outside 0..{op.p - 1}")
    b = _basis_rhs(op.k, op.p, j)
    objective = np.concatenate([np.zeros(op.nt), np.ones(op.nt)])
    rhs = np.concatenate([np.zeros(2 * op.nt), lam + b, lam - b])
    return LinearProgram(objective, op, rhs)


def build_column_lp(scatters, j, cfg: SimuleConfig) -> LinearProgram:
    """LP for column ``j`` (0-based) of the joint problem."""
    sigmas = _as_sigma_stack(scatters)
    k = sigmas.shape[0]
    return column_lp(sigmas, j, cfg.lambda_n, 1.0 / (cfg.epsilon * k))


def _solve_column(sigmas, j, lam, epsilon, solver):
    k, p, _ = sigmas.shape
    scale = None if epsilon is None else 1.0 / (epsilon * k)
    sol = solve_lp(column_lp(sigmas, j, lam, scale), solver)
    feasible = sol.status is LPStatus.OPTIMAL
    if feasible:
        theta = sol.x[:(k + (scale is not None)) * p]
        individual = theta[:k * p].reshape(k, p).copy()
        shared = theta[k * p:] * scale if scale is not None else None
    else:
        individual = np.zeros((k, p))
        shared = np.zeros(p) if scale is not None else None
    return ColumnSolution(
        col_index=j,
        beta_individual=individual,
        beta_shared=shared,
        feasible=feasible,
        status=sol.status,
        iterations=sol.iterations,
        duality_gap=sol.duality_gap,
        primal_residual=sol.primal_residual,
    )


def estimate_column(scatters, j, cfg: SimuleConfig) -> ColumnSolution:
    """Solve column ``j`` (0-based); infeasible columns come back as zeros."""
    sigmas = _as_sigma_stack(scatters)
    with threadpool_limits(1):
        return _solve_column(sigmas, j, cfg.lambda_n, cfg.epsilon, cfg.solver)


def _solve_chunk(sigmas, cols, lam, epsilon, solver):
    with threadpool_limits(1):
        return [_solve_column(sigmas, j, lam, epsilon, solver) for j in cols]


def _pool_context():
    methods = multiprocessing.get_all_start_methods()
    return multiprocessing.get_context("fork" if "fork" in methods else "spawn")


def solve_columns(sigmas, lam, epsilon, solver, workers=1, executor=None):
    """Solve all columns, serially or on a process pool; ordered by column."""
    p = sigmas.shape[1]
    if executor is None and workers <= 1:
        return _solve_chunk(sigmas, range(p), lam, epsilon, solver)
    n_chunks = min(p, 4 * max(workers, 1))
    chunks = [list(c) for c in np.array_split(np.arange(p), n_chunks) if len(c)]
    own = executor is None
    pool = executor or ProcessPoolExecutor(max_workers=workers, mp_context=_pool_context())
    try:
        futures = [pool.submit(_solve_chunk, sigmas, c, lam, epsilon, solver) for c in chunks]
        results = [col for f in futures for col in f.result()]
    finally:
        if own:
            pool.shutdown()
    return results


def symmetrize(raw):
    """Keep the smaller-magnitude entry of each ``(j, k)``/``(k, j)`` pair.

    Ties keep the upper-triangle value.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise UsageError(f"symmetrize needs a square matrix, got {raw.shape}")
    pick = np.where(np.abs(raw) <= np.abs(raw.T), raw, raw.T)
    upper = np.triu(pick, 1)
    return upper + upper.T + np.diag(np.diag(raw))


def build_scatters(tasks: Sequence[cov.TaskData], cfg: SimuleConfig):
    if not tasks:
        raise UsageError("need at least one task")
    if len({t.p for t in tasks}) != 1:
        raise DataError("all tasks must share the same number of features")
    names = {tuple(t.feature_names) for t in tasks if t.feature_names is not None}
    if len(names) > 1:
        raise DataError("tasks disagree on feature names")
    if cfg.mode == NONPARANORMAL:
        scatters = [cov.nonparanormal_correlation(t) for t in tasks]
    else:
        scatters = [cov.sample_covariance(t) for t in tasks]
    if cfg.intertwined:
        scatters = cov.intertwined_covariance(
            scatters, [t.n for t in tasks], cfg.intertwined_alpha
        )
    return scatters


def estimate_from_scatters(scatters, cfg: SimuleConfig, executor=None) -> JointPrecisionEstimate:
    sigmas = _as_sigma_stack(scatters)
    k, p, _ = sigmas.shape
    cols = solve_columns(sigmas, cfg.lambda_n, cfg.epsilon, cfg.solver, cfg.workers, executor)
    raw_individual = np.zeros((k, p, p))
    raw_shared = np.zeros((p, p))
    for c in cols:
        raw_individual[:, :, c.col_index] = c.beta_individual
        raw_shared[:, c.col_index] = c.beta_shared
    infeasible = [c.col_index for c in cols if not c.feasible]
    if len(infeasible) == p:
        raise EstimationError(
            f"every column is infeasible at lambda_n={cfg.lambda_n:.4g}; increase lambda_n"
        )
    return JointPrecisionEstimate(
        omega_shared=symmetrize(raw_shared),
        omega_individual=[symmetrize(m) for m in raw_individual],
        config=cfg,
        infeasible_columns=infeasible,
        columns=cols,
    )


def estimate(tasks: Sequence[cov.TaskData], cfg: SimuleConfig, executor=None) -> JointPrecisionEstimate:
    """Jointly estimate the shared and task-specific precision matrices."""
    return estimate_from_scatters(build_scatters(tasks, cfg), cfg, executor)


def clime_from_scatters(scatters, lam, solver=None, workers=1, executor=None):
    """Independent single-task estimates, one per scatter matrix.

    Returns ``(matrices, infeasible_columns_per_task, columns_per_task)``.
    """
    solver = solver or SolverOptions()
    out, infeasible, columns = [], [], []
    for s in scatters:
        sigma = _as_sigma_stack([s])
        cols = solve_columns(sigma, lam, None, solver, workers, executor)
        raw = np.zeros(sigma.shape[1:])
        for c in cols:
            raw[:, c.col_index] = c.beta_individual[0]
        out.append(symmetrize(raw))
        infeasible.append([c.col_index for c in cols if not c.feasible])
        columns.append(cols)
    return out, infeasible, columns


def clime_single(task: cov.TaskData, lam: float, solver: SolverOptions = None,
                 mode: str = GAUSSIAN) -> np.ndarray:
    """Single-task estimate ``min ||beta||_1 s.t. ||Sigma beta - e_j||_inf <= lam``."""
    if not lam > 0:
        raise UsageError("lambda must be positive")
    if mode == NONPARANORMAL:
        scatter = cov.nonparanormal_correlation(task)
    else:
        scatter = cov.sample_covariance(task)
    mats, infeasible, _ = clime_from_scatters([scatter], lam, solver)
    if len(infeasible[0]) == task.p:
        raise EstimationError(f"every column is infeasible at lambda={lam:.4g}")
    return mats[0]


def default_workers():
    env = os.environ.get("SIMULE_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"SIMULE_WORKERS must be an integer, got {env!r}") from None
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity")
               else (os.cpu_count() or 1))


def edge_count(matrix, threshold=1e-5):
    """Number of off-diagonal pairs ``j < k`` with ``|m_jk| > threshold``."""
    m = np.asarray(matrix)
    return int(np.count_nonzero(np.abs(m[np.triu_indices(m.shape[0], 1)]) > threshold))
