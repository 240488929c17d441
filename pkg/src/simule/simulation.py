"""Synthetic benchmark graphs and seeded data generation.

Random streams
--------------
All randomness comes from numpy's PCG64 generator seeded through
``numpy.random.SeedSequence(seed, spawn_key=key)``. Graph generation uses
key ``(0,)`` for the shared part and ``(i,)`` for task ``i`` (1-based).
Data sampling takes one integer seed per task; the CLI derives it as
``derive_seed(seed, 1000 + i)``. Identical seeds therefore reproduce
identical graphs and samples on any platform with the same numpy release.
"""
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .covariance import TaskData
from .errors import DataError, UsageError
from .linalg import as_symmetric, cholesky, min_eigenvalue, solve_spd

MODEL1 = "model1"
MODEL2 = "model2"
EDGE_VALUE = 0.5
DELTA_MARGIN = 0.5
GRAPH_EDGE = 0.2
DEFAULT_SAMPLES = 500


def make_rng(seed, *key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def derive_seed(seed, *key):
    """Independent 64-bit seed for a sub-stream of ``seed``."""
    state = np.random.SeedSequence(int(seed), spawn_key=key).generate_state(1, np.uint64)
    return int(state[0])


@dataclass
class GroundTruth:
    omegas: List[np.ndarray]
    shared_support: np.ndarray
    individual_supports: List[np.ndarray]
    model_tag: str

    @property
    def num_tasks(self):
        return len(self.omegas)

    @property
    def p(self):
        return self.omegas[0].shape[0]

    def total_supports(self):
        out = []
        for omega in self.omegas:
            support = omega != 0
            np.fill_diagonal(support, False)
            out.append(support)
        return out


def _random_support(rng, p, prob):
    """Symmetric boolean adjacency with independent upper-triangle draws."""
    upper = np.triu(rng.random((p, p)) < prob, 1)
    return upper | upper.T


def gen_model1(k, p, seed, shared_prob=0.1, individual_step=0.05):
    """Random shared plus task-specific supports.

    Task ``i`` has individual edge probability ``individual_step * i`` and
    all tasks share edges drawn with ``shared_prob``. Edge weights are 0.5;
    the diagonal is shifted to make each precision matrix positive definite
    with smallest eigenvalue at least 0.5.
    """
    if k < 1 or p < 2:
        raise UsageError("model1 needs K >= 1 and p >= 2")
    shared = _random_support(make_rng(seed, 0), p, shared_prob)
    omegas, individual = [], []
    for i in range(1, k + 1):
        own = _random_support(make_rng(seed, i), p, individual_step * i)
        b = EDGE_VALUE * own + EDGE_VALUE * shared
        delta = max(0.0, -min_eigenvalue(b)) + DELTA_MARGIN
        omegas.append(b + delta * np.eye(p))
        individual.append(own)
    return GroundTruth(omegas, shared, individual, MODEL1)


def grid_adjacency(p):
    """Lattice of ceil(sqrt p) rows, filled row-major and truncated to p nodes."""
    rows = math.ceil(math.sqrt(p))
    cols = math.ceil(p / rows)
    adj = np.zeros((p, p), dtype=bool)
    for node in range(p):
        r, c = divmod(node, cols)
        if c + 1 < cols and node + 1 < p:
            adj[node, node + 1] = True
        if node + cols < p:
            adj[node, node + cols] = True
    return adj | adj.T


def ring_adjacency(p):
    adj = np.zeros((p, p), dtype=bool)
    idx = np.arange(p)
    adj[idx, (idx + 1) % p] = True
    return adj | adj.T


def gen_model2(p):
    """Two tasks: a grid graph and a ring graph, edge weight 0.2, unit diagonal."""
    if p < 4:
        raise UsageError("model2 needs p >= 4")
    graphs = [grid_adjacency(p), ring_adjacency(p)]
    omegas = [GRAPH_EDGE * g + np.eye(p) for g in graphs]
    shared = graphs[0] & graphs[1]
    individual = [g & ~shared for g in graphs]
    return GroundTruth(omegas, shared, individual, MODEL2)


def sample_gaussian(omega, n, seed, task_id=1):
    """``n`` draws from ``N(0, omega^-1)`` as ``Z @ L.T`` with ``L L' = omega^-1``."""
    if n < 2:
        raise DataError(f"need at least 2 samples, got {n}")
    omega = as_symmetric(omega, "omega")
    sigma = solve_spd(omega, np.eye(omega.shape[0]))
    sigma = (sigma + sigma.T) / 2
    lower = cholesky(sigma)
    z = make_rng(seed).standard_normal((n, omega.shape[0]))
    return TaskData(z @ lower.T, task_id=task_id)


def nonparanormal_transform(x):
    """Strictly increasing map ``x -> sign(x) sqrt(|x|)``."""
    return np.sign(x) * np.sqrt(np.abs(x))


def sample_nonparanormal(omega, n, seed, task_id=1):
    """Gaussian draws pushed through :func:`nonparanormal_transform`."""
    latent = sample_gaussian(omega, n, seed, task_id)
    return TaskData(nonparanormal_transform(latent.samples), task_id=task_id)


def sample_tasks(truth: GroundTruth, n, seed, dist="gaussian"):
    """One data block per task, each on its own derived stream."""
    if dist not in ("gaussian", "nonparanormal"):
        raise UsageError(f"unknown distribution {dist!r}")
    sampler = sample_nonparanormal if dist == "nonparanormal" else sample_gaussian
    return [sampler(omega, n, derive_seed(seed, 1000 + i), task_id=i)
            for i, omega in enumerate(truth.omegas, start=1)]
