"""Edge-recovery scoring: confusion counts, ROC curves over a lambda sweep,
(partial) AUC, BIC model selection and an error-versus-n probe."""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import estimator as est
from .errors import EstimationError, EvaluationError, UsageError
from .linalg import min_eigenvalue
from .lp import SolverOptions
from .simulation import GroundTruth, gen_model1, sample_tasks

DEFAULT_ALPHAS = tuple(round(0.05 * i, 10) for i in range(1, 31))
TOTAL, SHARED, INDIVIDUAL = "total", "shared", "individual"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def fpr(self):
        neg = self.fp + self.tn
        return self.fp / neg if neg else 0.0

    @property
    def tpr(self):
        pos = self.tp + self.fn
        return self.tp / pos if pos else 0.0


def edge_confusion(est_matrix, truth_support, threshold=1e-5) -> ConfusionCounts:
    """Confusion counts over the strict upper triangle."""
    m = np.asarray(est_matrix)
    t = np.asarray(truth_support, dtype=bool)
    if m.shape != t.shape or m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError(f"estimate {m.shape} and truth {t.shape} must be matching squares")
    if not threshold > 0:
        raise UsageError("threshold must be positive")
    iu = np.triu_indices(m.shape[0], 1)
    pred = np.abs(m[iu]) > threshold
    truth = t[iu]
    return ConfusionCounts(
        tp=int(np.sum(pred & truth)),
        fp=int(np.sum(pred & ~truth)),
        tn=int(np.sum(~pred & ~truth)),
        fn=int(np.sum(~pred & truth)),
    )


def _normalize_points(points):
    """Sort by FPR, keep the best TPR per FPR, add the (0,0)/(1,1) anchors."""
    best = {}
    for fpr, tpr in list(points) + [(0.0, 0.0), (1.0, 1.0)]:
        fpr, tpr = float(fpr), float(tpr)
        best[fpr] = max(best.get(fpr, -1.0), tpr)
    return [(f, best[f]) for f in sorted(best)]


@dataclass
class RocCurve:
    points: List[tuple]
    lambda_grid: List[float] = field(default_factory=list)
    rows: List[dict] = field(default_factory=list)

    def __post_init__(self):
        self.points = _normalize_points(self.points)


def auc(curve) -> float:
    pts = _normalize_points(curve.points if isinstance(curve, RocCurve) else curve)
    f = np.array([p[0] for p in pts])
    t = np.array([p[1] for p in pts])
    return float(np.sum(np.diff(f) * (t[1:] + t[:-1]) / 2))


def partial_auc(curve, q) -> float:
    """Un-normalized area for FPR in ``[0, q]``; a perfect curve scores ``q``."""
    if not 0 < q <= 1:
        raise UsageError("q must lie in (0, 1]")
    pts = _normalize_points(curve.points if isinstance(curve, RocCurve) else curve)
    f = np.array([p[0] for p in pts])
    t = np.array([p[1] for p in pts])
    inside = f < q
    fc = np.append(f[inside], q)
    # right-continuous interpolation: at a vertical jump the upper value counts
    idx = np.searchsorted(f, q, side="right") - 1
    if f[idx] == q:
        tq = t[idx]
    else:
        tq = t[idx] + (t[idx + 1] - t[idx]) * (q - f[idx]) / (f[idx + 1] - f[idx])
    tc = np.append(t[inside], tq)
    return float(np.sum(np.diff(fc) * (tc[1:] + tc[:-1]) / 2))


@dataclass
class AucReport:
    auc: float
    auc_shared: Optional[float]
    auc_individual: Optional[float]
    pauc_20: float
    pauc_5: float

    def as_dict(self):
        return {
            "auc": self.auc,
            "auc_shared": self.auc_shared,
            "auc_individual": self.auc_individual,
            "pauc_20": self.pauc_20,
            "pauc_5": self.pauc_5,
        }


def auc_report(curves: Dict[str, RocCurve]) -> AucReport:
    total = curves[TOTAL]
    return AucReport(
        auc=auc(total),
        auc_shared=auc(curves[SHARED]) if SHARED in curves else None,
        auc_individual=auc(curves[INDIVIDUAL]) if INDIVIDUAL in curves else None,
        pauc_20=partial_auc(total, 0.2),
        pauc_5=partial_auc(total, 0.05),
    )


def _mean_rates(matrices, supports, threshold):
    counts = [edge_confusion(m, s, threshold) for m, s in zip(matrices, supports)]
    return float(np.mean([c.fpr for c in counts])), float(np.mean([c.tpr for c in counts]))


# Modes understood by the sweep, see cli for the user-facing names.
METHOD_MODES = {
    "simule": (est.GAUSSIAN, True),
    "nsimule": (est.NONPARANORMAL, True),
    "clime": (est.GAUSSIAN, False),
    "nclime": (est.NONPARANORMAL, False),
}


@dataclass
class SweepResult:
    curves: Dict[str, RocCurve]
    report: AucReport
    skipped: List[float]


def fit_method(tasks, method, lam, epsilon=0.5, intertwined=False, alpha_cov=0.5,
               solver=None, workers=1, executor=None):
    """Run one estimator and return ``(totals, shared, individuals, infeasible)``.

    Single-task methods return ``None`` for the shared/individual parts.
    """
    mode, joint = METHOD_MODES[method]
    solver = solver or SolverOptions()
    cfg = est.SimuleConfig(lam, epsilon, mode, intertwined, alpha_cov, workers, solver)
    scatters = est.build_scatters(tasks, cfg)
    return fit_scatters(scatters, method, cfg, executor)


def fit_scatters(scatters, method, cfg, executor=None):
    _, joint = METHOD_MODES[method]
    if joint:
        fit = est.estimate_from_scatters(scatters, cfg, executor)
        return fit.omega_total, fit.omega_shared, fit.omega_individual, fit.infeasible_columns
    mats, infeasible, _ = est.clime_from_scatters(
        scatters, cfg.lambda_n, cfg.solver, cfg.workers, executor
    )
    p = scatters[0].dim
    if all(len(cols) == p for cols in infeasible):
        raise EstimationError(f"every column is infeasible at lambda_n={cfg.lambda_n:.4g}")
    return mats, None, None, sorted({j for cols in infeasible for j in cols})


def roc_sweep(tasks, truth: GroundTruth, alphas: Sequence[float] = DEFAULT_ALPHAS,
              method="simule", epsilon=0.5, intertwined=False, alpha_cov=0.5,
              solver=None, workers=1, executor=None, threshold=1e-5) -> SweepResult:
    """Score one estimate per alpha and build total/shared/individual curves."""
    if not alphas:
        raise UsageError("alphas must be non-empty")
    mode, joint = METHOD_MODES[method]
    k, p = len(tasks), tasks[0].p
    n_tot = sum(t.n for t in tasks)
    solver = solver or SolverOptions()
    base = est.SimuleConfig(1.0, epsilon, mode, intertwined, alpha_cov, workers, solver)
    scatters = est.build_scatters(tasks, base)
    rows = {TOTAL: [], SHARED: [], INDIVIDUAL: []}
    skipped, used = [], []
    for alpha in alphas:
        lam = est.lambda_from_alpha(alpha, k, p, n_tot)
        cfg = est.SimuleConfig(lam, epsilon, mode, intertwined, alpha_cov, workers, solver)
        try:
            totals, shared, individual, _ = fit_scatters(scatters, method, cfg, executor)
        except EstimationError:
            skipped.append(alpha)
            continue
        used.append(alpha)
        parts = {TOTAL: (totals, truth.total_supports())}
        if joint:
            parts[SHARED] = ([shared], [truth.shared_support])
            parts[INDIVIDUAL] = (individual, truth.individual_supports)
        for name, (mats, sups) in parts.items():
            fpr, tpr = _mean_rates(mats, sups, threshold)
            rows[name].append({"alpha": alpha, "lambda_n": lam, "fpr": fpr, "tpr": tpr})
    if not used:
        raise EvaluationError("every alpha in the sweep was infeasible")
    curves = {}
    for name, rs in rows.items():
        if rs:
            curves[name] = RocCurve([(r["fpr"], r["tpr"]) for r in rs],
                                    [r["alpha"] for r in rs], rs)
    return SweepResult(curves, auc_report(curves), skipped)


def bic_scores(scatters, counts, estimates, threshold=1e-5):
    """Per-candidate BIC and whether any matrix needed a PD shift.

    ``BIC = sum_i n_i (tr(S_i W_i) - log det W_i) + log(n_i) * edges(W_i)``
    where non-PD ``W_i`` is shifted by ``(|lambda_min| + 1e-3) I`` inside
    the log-determinant only.
    """
    scores, flags = [], []
    for omegas in estimates:
        total, shifted = 0.0, False
        for s, n, w in zip(scatters, counts, omegas):
            s = s.matrix if hasattr(s, "matrix") else np.asarray(s)
            sign, logdet = np.linalg.slogdet(w)
            if sign <= 0:
                lam_min = min_eigenvalue((w + w.T) / 2)
                shift = abs(lam_min) + 1e-3
                _, logdet = np.linalg.slogdet(w + shift * np.eye(w.shape[0]))
                shifted = True
            total += n * (np.trace(s @ w) - logdet) + math.log(n) * est.edge_count(w, threshold)
        scores.append(float(total))
        flags.append(shifted)
    return scores, flags


def bic_select(candidates, tasks, threshold=1e-5):
    """Index of the BIC-minimizing candidate; ties go to the smallest index.

    ``candidates`` is a list of ``(config, JointPrecisionEstimate)`` pairs or
    of plain lists of per-task precision matrices.
    """
    if not candidates:
        raise UsageError("need at least one candidate")
    estimates, scatter_cfg = [], None
    for cand in candidates:
        if isinstance(cand, tuple) and len(cand) == 2 and hasattr(cand[1], "omega_total"):
            scatter_cfg = scatter_cfg or cand[0]
            estimates.append(cand[1].omega_total)
        else:
            estimates.append(list(cand))
    if scatter_cfg is None:
        scatter_cfg = est.SimuleConfig(1.0)
    scatters = est.build_scatters(tasks, scatter_cfg)
    scores, _ = bic_scores(scatters, [t.n for t in tasks], estimates, threshold)
    return int(np.argmin(scores))


@dataclass
class ProbeRow:
    n: int
    frobenius: float
    max_abs: float
    per_seed_frobenius: List[float]


def convergence_probe(k, p, n_list, seeds, alpha=1.0, epsilon=0.5, method="simule",
                      solver=None, workers=1, executor=None):
    """Mean estimation error against the truth for each per-task sample size."""
    if list(n_list) != sorted(n_list):
        raise UsageError("n_list must be increasing")
    rows = []
    for n in n_list:
        frob, sup = [], []
        for seed in seeds:
            truth = gen_model1(k, p, seed)
            tasks = sample_tasks(truth, n, seed)
            lam = est.lambda_from_alpha(alpha, k, p, k * n)
            totals, _, _, _ = fit_method(tasks, method, lam, epsilon, solver=solver,
                                         workers=workers, executor=executor)
            frob.append(float(np.mean([np.linalg.norm(w - o, "fro")
                                       for w, o in zip(totals, truth.omegas)])))
            sup.append(float(np.mean([np.max(np.abs(w - o))
                                      for w, o in zip(totals, truth.omegas)])))
        rows.append(ProbeRow(n, float(np.mean(frob)), float(np.mean(sup)), frob))
    return rows
