"""Per-task scatter matrices: sample covariance, Kendall-tau correlation and
the intertwined (globally blended) covariance."""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DataError, UsageError
from .linalg import as_matrix

SAMPLE_COVARIANCE = "sample_covariance"
KENDALL_CORRELATION = "kendall_correlation"
INTERTWINED = "intertwined"

# Sample pairs processed per block in the Kendall product; bounds memory.
_PAIR_BLOCK = 20000


@dataclass
class TaskData:
    """One data block: ``samples`` is n x p with observations in rows."""

    samples: np.ndarray
    feature_names: Optional[List[str]] = None
    task_id: int = 1

    def __post_init__(self):
        self.samples = as_matrix(self.samples, "samples")
        if self.feature_names is not None and len(self.feature_names) != self.p:
            raise DataError(
                f"{len(self.feature_names)} feature names for {self.p} columns"
            )

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def p(self):
        return self.samples.shape[1]


@dataclass
class ScatterMatrix:
    matrix: np.ndarray
    kind: str
    source_n: int
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.matrix.shape[0]


def _require_samples(x: TaskData):
    if x.n < 2:
        raise DataError(f"task {x.task_id}: need at least 2 samples, got {x.n}")


def sample_covariance(x: TaskData) -> ScatterMatrix:
    """Unbiased sample covariance (divisor ``n - 1``)."""
    _require_samples(x)
    centered = x.samples - x.samples.mean(axis=0)
    cov = centered.T @ centered / (x.n - 1)
    cov = (cov + cov.T) / 2
    return ScatterMatrix(cov, SAMPLE_COVARIANCE, x.n)


def kendall_tau_matrix(x: TaskData) -> np.ndarray:
    """Kendall's tau for every column pair.

    ``tau[j, k] = 2 / (n (n - 1)) * sum_{i < i'} sign((z_ij - z_i'j)(z_ik - z_i'k))``.
    Ties contribute zero; no tie correction is applied. The pair sums are
    integers accumulated exactly in floating point, so the result depends
    only on the ranks of each column.
    """
    _require_samples(x)
    z = x.samples
    n, p = z.shape
    rows, cols = np.triu_indices(n, k=1)
    concordance = np.zeros((p, p))
    for start in range(0, rows.size, _PAIR_BLOCK):
        r = rows[start:start + _PAIR_BLOCK]
        c = cols[start:start + _PAIR_BLOCK]
        signs = np.sign(z[r] - z[c])
        concordance += signs.T @ signs
    tau = 2.0 * concordance / (n * (n - 1))
    return np.clip(tau, -1.0, 1.0)


def nonparanormal_correlation(x: TaskData) -> ScatterMatrix:
    """Rank-based latent correlation ``sin(pi/2 * tau)`` with unit diagonal."""
    tau = kendall_tau_matrix(x)
    s = np.sin(0.5 * np.pi * tau)
    np.fill_diagonal(s, 1.0)
    return ScatterMatrix(s, KENDALL_CORRELATION, x.n)


def intertwined_covariance(
    scatters: Sequence[ScatterMatrix], counts: Sequence[int], alpha: float = 0.5
) -> List[ScatterMatrix]:
    """Blend each scatter with the sample-size weighted global average.

    ``S~_i = alpha * S_i + (1 - alpha) * sum_t n_t S_t / n_tot``
    """
    if len(scatters) != len(counts) or not scatters:
        raise UsageError("need one positive count per scatter matrix")
    if not 0.0 <= alpha <= 1.0:
        raise UsageError(f"alpha must lie in [0, 1], got {alpha}")
    dims = {s.matrix.shape for s in scatters}
    if len(dims) != 1:
        raise UsageError(f"scatter matrices disagree in shape: {sorted(dims)}")
    if any(c <= 0 for c in counts):
        raise UsageError("counts must be positive")
    if alpha == 1.0:
        return [ScatterMatrix(s.matrix.copy(), INTERTWINED, s.source_n) for s in scatters]
    n_tot = float(sum(counts))
    pooled = sum(c * s.matrix for c, s in zip(counts, scatters)) / n_tot
    out = []
    for s in scatters:
        blended = alpha * s.matrix + (1.0 - alpha) * pooled
        blended = (blended + blended.T) / 2
        out.append(ScatterMatrix(blended, INTERTWINED, s.source_n))
    return out
