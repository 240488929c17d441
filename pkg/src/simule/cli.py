"""Command-line interface: ``simule {simulate,estimate,roc,bench}``.

Exit codes: 0 success, 1 usage, 2 data/I-O, 3 estimation failure,
4 sweep failure. Every command writes ``meta.json`` into its output
directory; data go to files and stdout carries a one-line summary.
"""
import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import estimator as est
from . import evaluation as ev
from . import fileio
from .errors import (DataError, EstimationError, EvaluationError, NotPositiveDefinite,
                     SolverError, UsageError)
from .simulation import (DEFAULT_SAMPLES, GroundTruth, derive_seed, gen_model1, gen_model2,
                         sample_tasks)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ESTIMATION, EXIT_SWEEP = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def parse_alphas(text):
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    if ":" in text:
        try:
            start, step, stop = (float(v) for v in text.split(":"))
        except ValueError:
            raise UsageError(f"bad alpha grid {text!r}; expected start:step:stop") from None
        if step <= 0 or stop < start or start <= 0:
            raise UsageError(f"bad alpha grid {text!r}")
        count = int(round((stop - start) / step)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    try:
        values = [float(v) for v in text.split(",") if v]
    except ValueError:
        raise UsageError(f"bad alpha list {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise UsageError("alphas must be positive")
    return values


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _workers(value):
    return value if value is not None else est.default_workers()


def _write_meta(out, args, started, seeds=(), inputs=()):
    fileio.write_json(os.path.join(out, "meta.json"), {
        "command": sys.argv[:1] + [args.command] + getattr(args, "_argv", []),
        "config": {k: v for k, v in vars(args).items() if not k.startswith("_") and k != "func"},
        "seeds": list(seeds),
        "inputs": list(inputs),
        "output": os.path.abspath(out),
        "wall_seconds": round(time.time() - started, 3),
        "version": __version__,
    })


def _truth_for(args):
    if args.model == "model2":
        return gen_model2(args.p)
    return gen_model1(args.K, args.p, args.seed)


def cmd_simulate(args):
    started = time.time()
    if args.p < 2 or args.n < 2 or args.K < 1:
        raise UsageError("need p >= 2, n >= 2 and K >= 1")
    truth = _truth_for(args)
    tasks = sample_tasks(truth, args.n, args.seed, args.dist)
    out = fileio.ensure_dir(args.out)
    header = [f"X{j + 1}" for j in range(args.p)] if args.header else None
    for i, (task, omega) in enumerate(zip(tasks, truth.omegas), start=1):
        fileio.write_matrix(os.path.join(out, f"data_task{i}.csv"), task.samples, header)
        fileio.write_matrix(os.path.join(out, f"truth_omega{i}.csv"), omega)
        fileio.write_support(os.path.join(out, f"truth_individual_support{i}.csv"),
                             truth.individual_supports[i - 1])
    fileio.write_support(os.path.join(out, "truth_shared_support.csv"), truth.shared_support)
    _write_meta(out, args, started, seeds=[args.seed])
    print(f"simulate: {truth.model_tag} K={truth.num_tasks} p={args.p} n={args.n} "
          f"dist={args.dist} -> {out}")
    return EXIT_OK


def _check_tasks(tasks):
    if len({t.p for t in tasks}) != 1:
        raise DataError("input files disagree in the number of columns")


def cmd_estimate(args):
    started = time.time()
    paths = [p for p in args.inputs.split(",") if p]
    if not paths:
        raise UsageError("--inputs needs at least one file")
    tasks = [fileio.read_task(p, task_id=i) for i, p in enumerate(paths, start=1)]
    _check_tasks(tasks)
    k, p = len(tasks), tasks[0].p
    n_tot = sum(t.n for t in tasks)
    lam = est.lambda_from_alpha(args.lambda_alpha, k, p, n_tot)
    mode, joint = ev.METHOD_MODES[args.mode]
    cfg = est.SimuleConfig(lam, args.epsilon, mode, args.intertwined, args.alpha_cov,
                           _workers(args.workers))
    out = fileio.ensure_dir(args.out)
    names = tasks[0].feature_names if args.header else None
    scatters = est.build_scatters(tasks, cfg)
    report = {"lambda_n": lam, "lambda_alpha": args.lambda_alpha, "mode": args.mode,
              "epsilon": args.epsilon, "intertwined": args.intertwined,
              "alpha_cov": args.alpha_cov, "K": k, "p": p, "n": [t.n for t in tasks]}
    if joint:
        fit = est.estimate_from_scatters(scatters, cfg)
        fileio.write_matrix(os.path.join(out, "omega_shared.csv"), fit.omega_shared, names)
        for i, (ind, tot) in enumerate(zip(fit.omega_individual, fit.omega_total), start=1):
            fileio.write_matrix(os.path.join(out, f"omega_individual{i}.csv"), ind, names)
            fileio.write_matrix(os.path.join(out, f"omega_total{i}.csv"), tot, names)
        columns = fit.columns
        report["infeasible_columns"] = fit.infeasible_columns
        report["edges"] = {
            "shared": est.edge_count(fit.omega_shared, cfg.edge_threshold),
            "individual": [est.edge_count(m, cfg.edge_threshold) for m in fit.omega_individual],
            "total": [est.edge_count(m, cfg.edge_threshold) for m in fit.omega_total],
        }
    else:
        mats, infeasible, per_task = est.clime_from_scatters(scatters, lam, cfg.solver,
                                                             cfg.workers)
        if all(len(cols) == p for cols in infeasible):
            raise EstimationError(f"every column is infeasible at lambda_n={lam:.4g}; "
                                  "increase --lambda-alpha")
        for i, m in enumerate(mats, start=1):
            fileio.write_matrix(os.path.join(out, f"omega_total{i}.csv"), m, names)
        columns = [c for cols in per_task for c in cols]
        report["infeasible_columns"] = infeasible
        report["edges"] = {"total": [est.edge_count(m, cfg.edge_threshold) for m in mats]}
    iters = [c.iterations for c in columns]
    report["columns"] = {
        "count": len(columns),
        "iterations_mean": float(np.mean(iters)),
        "iterations_max": int(np.max(iters)),
        "max_duality_gap": float(max(c.duality_gap for c in columns if c.feasible)),
        "max_primal_residual": float(max(c.primal_residual for c in columns if c.feasible)),
        "status_counts": _status_counts(columns),
    }
    fileio.write_json(os.path.join(out, "report.json"), report)
    _write_meta(out, args, started, inputs=paths)
    print(f"estimate: {args.mode} K={k} p={p} lambda_n={lam:.6g} -> {out}")
    return EXIT_OK


def _status_counts(columns):
    counts = {}
    for c in columns:
        counts[c.status.value] = counts.get(c.status.value, 0) + 1
    return counts


def load_truth_dir(path):
    """Read a ``simulate`` output directory: truth, data blocks and metadata."""
    meta = fileio.read_json(os.path.join(path, "meta.json"))
    omegas, individual, tasks = [], [], []
    i = 1
    while os.path.exists(os.path.join(path, f"truth_omega{i}.csv")):
        omegas.append(fileio.read_matrix(os.path.join(path, f"truth_omega{i}.csv")))
        individual.append(
            fileio.read_matrix(os.path.join(path, f"truth_individual_support{i}.csv")) != 0)
        tasks.append(fileio.read_task(os.path.join(path, f"data_task{i}.csv"), task_id=i))
        i += 1
    if not omegas:
        raise DataError(f"{path} holds no truth_omega*.csv files")
    shared = fileio.read_matrix(os.path.join(path, "truth_shared_support.csv")) != 0
    omegas = [(o + o.T) / 2 for o in omegas]
    truth = GroundTruth(omegas, shared, individual, meta.get("config", {}).get("model", ""))
    return truth, tasks, meta


def _self_test_sweep(truth, alphas):
    """Score the truth itself at every alpha; exercises the curve/AUC path."""
    parts = {
        ev.TOTAL: (truth.omegas, truth.total_supports()),
        ev.SHARED: ([truth.shared_support.astype(float)], [truth.shared_support]),
        ev.INDIVIDUAL: ([m.astype(float) for m in truth.individual_supports],
                        truth.individual_supports),
    }
    curves = {}
    for name, (mats, sups) in parts.items():
        rows = []
        for a in alphas:
            fpr, tpr = ev._mean_rates(mats, sups, 1e-5)
            rows.append({"alpha": a, "lambda_n": float("nan"), "fpr": fpr, "tpr": tpr})
        curves[name] = ev.RocCurve([(r["fpr"], r["tpr"]) for r in rows], list(alphas), rows)
    return ev.SweepResult(curves, ev.auc_report(curves), [])


def _write_curve(path, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write("alpha,lambda_n,fpr,tpr\n")
        for r in rows:
            fh.write(fileio.format_row([r["alpha"], r["lambda_n"], r["fpr"], r["tpr"]]) + "\n")


def cmd_roc(args):
    started = time.time()
    alphas = parse_alphas(args.alphas)
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    truth, base_tasks, meta = load_truth_dir(args.truth_dir)
    cfg_meta = meta.get("config", {})
    base_seed = int(cfg_meta.get("seed", 0))
    dist = cfg_meta.get("dist", "gaussian")
    n = base_tasks[0].n
    out = fileio.ensure_dir(args.out)
    workers = _workers(args.workers)
    method = args.mode
    per_seed, seeds_used = [], []
    pool = ProcessPoolExecutor(max_workers=workers, mp_context=est._pool_context()) \
        if workers > 1 else None
    try:
        for s in range(args.seeds):
            if s == 0:
                tasks, seed = base_tasks, base_seed
            else:
                seed = derive_seed(base_seed, 2000 + s)
                tasks = sample_tasks(truth, n, seed, dist)
            if args.self_test:
                result = _self_test_sweep(truth, alphas)
            else:
                result = ev.roc_sweep(tasks, truth, alphas, method, args.epsilon,
                                      args.intertwined, args.alpha_cov, workers=workers,
                                      executor=pool)
            per_seed.append(result)
            seeds_used.append(seed)
            if s == 0:
                for name in (ev.TOTAL, ev.SHARED, ev.INDIVIDUAL):
                    rows = result.curves[name].rows if name in result.curves else []
                    _write_curve(os.path.join(out, f"roc_{name}.csv"), rows)
    finally:
        if pool is not None:
            pool.shutdown()
    reports = [r.report.as_dict() for r in per_seed]
    means = {}
    for key in reports[0]:
        vals = [r[key] for r in reports if r[key] is not None]
        means[key] = float(np.mean(vals)) if vals else None
    fileio.write_json(os.path.join(out, "auc.json"), {
        "method": method,
        "seeds": seeds_used,
        "per_seed": reports,
        "skipped_alphas": [r.skipped for r in per_seed],
        "mean": means,
    })
    _write_meta(out, args, started, seeds=seeds_used, inputs=[args.truth_dir])
    print(f"roc: {method} seeds={args.seeds} mean auc={means['auc']:.4f} -> {out}")
    return EXIT_OK


def cmd_bench(args):
    started = time.time()
    ps = _int_list(args.p)
    worker_list = _int_list(args.workers)
    if 1 not in worker_list:
        worker_list = [1] + worker_list
    out = fileio.ensure_dir(args.out)
    rows = []
    for p in ps:
        truth = gen_model1(args.K, p, args.seed)
        tasks = sample_tasks(truth, args.n, args.seed)
        lam = est.lambda_from_alpha(args.lambda_alpha, args.K, p, args.K * args.n)
        for w in worker_list:
            cfg = est.SimuleConfig(lam, args.epsilon, workers=w)
            t0 = time.perf_counter()
            est.estimate(tasks, cfg)
            rows.append((p, w, time.perf_counter() - t0))
    with open(os.path.join(out, "timing.csv"), "w", newline="\n") as fh:
        fh.write("p,workers,wall_seconds\n")
        for p, w, secs in rows:
            fh.write(f"{p},{w},{secs:.6f}\n")
    _write_meta(out, args, started, seeds=[args.seed])
    print(f"bench: {len(rows)} runs -> {out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="simule", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate benchmark data and ground truth")
    p.add_argument("--model", choices=["model1", "model2"], required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--K", type=int, default=3, help="tasks (model1 only)")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--dist", choices=["gaussian", "nonparanormal"], default="gaussian")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--header", action="store_true", help="write feature names")
    p.set_defaults(func=cmd_simulate)

    method_choices = sorted(ev.METHOD_MODES)

    p = sub.add_parser("estimate", help="estimate precision matrices from CSV data")
    p.add_argument("--inputs", required=True, help="comma-separated data CSVs, one per task")
    p.add_argument("--mode", choices=method_choices, default="simule")
    p.add_argument("--intertwined", action="store_true")
    p.add_argument("--alpha-cov", type=float, default=0.5)
    p.add_argument("--lambda-alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=".")
    p.add_argument("--header", action="store_true", help="write feature names")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("roc", help="sweep the constraint radius and score edge recovery")
    p.add_argument("--truth-dir", required=True)
    p.add_argument("--mode", choices=method_choices, default="simule")
    p.add_argument("--alphas", default="0.05:0.05:1.5")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--intertwined", action="store_true")
    p.add_argument("--alpha-cov", type=float, default=0.5)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--self-test", action="store_true",
                   help="score the ground truth itself instead of an estimate")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("bench", help="time estimation against worker count")
    p.add_argument("--p", required=True, help="comma-separated dimensions")
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--workers", required=True, help="comma-separated worker counts")
    p.add_argument("--lambda-alpha", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    args._argv = argv[1:]
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"simule: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"simule: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (EstimationError, NotPositiveDefinite, SolverError) as exc:
        print(f"simule: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except EvaluationError as exc:
        print(f"simule: sweep failed: {exc}", file=sys.stderr)
        return EXIT_SWEEP


if __name__ == "__main__":
    sys.exit(main())
