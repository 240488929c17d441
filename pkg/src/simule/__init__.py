"""Joint sparse precision-matrix estimation across related tasks.

The estimator splits each task's precision matrix into a shared part and a
task-specific part and recovers both column by column through small linear
programs.
"""
__version__ = "0.1.0"

from .covariance import (TaskData, ScatterMatrix, sample_covariance, kendall_tau_matrix,
                         nonparanormal_correlation, intertwined_covariance)
from .estimator import (SimuleConfig, JointPrecisionEstimate, ColumnSolution, estimate,
                        estimate_column, build_column_lp, clime_single, lambda_from_alpha,
                        symmetrize)
from .lp import LinearProgram, LPSolution, LPStatus, SolverOptions, solve_lp
from .simulation import GroundTruth, gen_model1, gen_model2, sample_tasks
from .evaluation import (RocCurve, AucReport, auc, partial_auc, roc_sweep, bic_select,
                         convergence_probe, edge_confusion)
from .errors import (SimuleError, UsageError, DataError, NotPositiveDefinite, SolverError,
                     EstimationError, EvaluationError)
