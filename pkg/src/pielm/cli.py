"""Command-line front end: run catalog cases or JSON configs, sweep seeds,
emit plot-ready CSV and a stable JSON summary.

Exit codes: 0 success, 1 usage/invalid configuration, 2 solver failure.
Output directory defaults to $PIELM_OUT_DIR or ./pielm-out.  All files are
written atomically (temp file + rename).  summary.json is key-sorted; apart
from the wall-clock timing fields it is byte-identical across repeated runs
with the same configuration.
"""

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from statistics import median
from typing import Optional

import numpy as np

from . import cases, dpielm, geometry, pielm

TIMING_KEYS = ("train_time_s",)  # volatile fields, excluded from determinism checks


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    pass


@dataclass
class RunConfig:
    case: Optional[str] = None
    config_path: Optional[str] = None
    method: str = "pielm"
    seed: Optional[int] = None
    neurons: Optional[int] = None
    arch: Optional[tuple] = None
    solver: Optional[str] = None
    tol: Optional[float] = None
    out: Optional[str] = None
    eval_grid: Optional[tuple] = None
    case_options: dict = field(default_factory=dict)

    def validate(self):
        if (self.case is None) == (self.config_path is None):
            raise UsageError("exactly one of --case or --config must be given")
        if self.method not in ("pielm", "dpielm"):
            raise UsageError(f"method must be pielm or dpielm, got {self.method!r}")


def load_config_file(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    known = {f for f in RunConfig.__dataclass_fields__ if f != "config_path"}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = RunConfig(**{k: v for k, v in raw.items()})
    if cfg.arch is not None:
        cfg.arch = tuple(int(v) for v in cfg.arch)
    if cfg.eval_grid is not None:
        cfg.eval_grid = tuple(int(v) for v in cfg.eval_grid)
    return cfg


def _split_arch(arch: tuple) -> dpielm.DpielmConfig:
    """Decode the [NB..., nb..., N*] architecture vector (3/5/7 entries)."""
    if len(arch) not in (3, 5, 7):
        raise UsageError(f"architecture vector needs 3, 5 or 7 entries, got {len(arch)}")
    k = len(arch) // 2
    return dpielm.DpielmConfig(tuple(arch[:k]), tuple(arch[k : 2 * k]), int(arch[2 * k]))


def _resolve_case(cfg: RunConfig) -> cases.TestCase:
    try:
        return cases.build_case(cfg.case, **cfg.case_options)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _build_model(case: cases.TestCase, cfg: RunConfig):
    from dataclasses import replace

    seed = 0 if cfg.seed is None else int(cfg.seed)
    if cfg.method == "pielm":
        base = case.default_pielm
        if base is None:
            raise UsageError(f"{case.id} has no single-network default; supply point counts via --config")
        base = replace(base, seed=seed)
        if cfg.neurons is not None:
            base = replace(base, n_neurons=int(cfg.neurons))
        if cfg.solver is not None:
            base = replace(base, method=cfg.solver)
        if cfg.tol is not None:
            base = replace(base, tolerance=float(cfg.tol))
        return pielm.train(case.problem, base), base
    base = case.default_dpielm
    if cfg.arch is not None:
        base = _split_arch(cfg.arch)
    if base is None:
        raise UsageError(f"{case.id} has no decomposition default; pass --arch")
    base = replace(base, seed=seed)
    if cfg.neurons is not None:
        base = replace(base, n_neurons=int(cfg.neurons))
    if cfg.solver is not None:
        base = replace(base, method=cfg.solver)
    if cfg.tol is not None:
        base = replace(base, tolerance=float(cfg.tol))
    return dpielm.train_dpielm(case.problem, base), base


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, columns) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def _write_solution(out_dir: str, case: cases.TestCase, model, report: pielm.ErrorReport):
    dim = report.points.shape[1]
    timed = isinstance(case.problem.domain, geometry.TimeExtruded)
    names = {1: ["x"], 2: ["x", "t"] if timed else ["x", "y"], 3: ["x", "y", "t"]}[dim]
    header = names + ["u_exact", "u_pred", "error"]
    cols = [report.points[:, j] for j in range(dim)] + [
        report.exact_values,
        report.predicted,
        report.errors,
    ]
    _atomic_write(os.path.join(out_dir, "solution.csv"), _csv_text(header, cols))

    if not timed:
        return
    t_final = case.problem.domain.t_final
    spatial = case.problem.domain.spatial
    for t in (0.0, t_final / 2, t_final):
        if isinstance(spatial, geometry.Interval):
            x = np.linspace(spatial.lo, spatial.hi, 201)
            pts = np.column_stack([x, np.full(x.size, t)])
            snap_names = ["x"]
        else:
            lo, hi = geometry.bounding_box(spatial)
            ax = [np.linspace(lo[j], hi[j], 101) for j in range(2)]
            gx, gy = np.meshgrid(*ax, indexing="ij")
            pts = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, t)])
            snap_names = ["x", "y"]
        pred = model.predict(pts)
        exact = np.asarray(case.exact(pts)).reshape(-1)
        cols = [pts[:, j] for j in range(len(snap_names))] + [exact, pred, pred - exact]
        _atomic_write(
            os.path.join(out_dir, f"snapshot_t{t:g}.csv"),
            _csv_text(snap_names + ["u_exact", "u_pred", "error"], cols),
        )


def _failure_metrics(case: cases.TestCase, model, report: pielm.ErrorReport) -> dict:
    out = {"failure_suspected": bool(report.max_abs_error > 0.1)}
    domain = case.problem.domain
    if isinstance(domain, geometry.TimeExtruded) and isinstance(domain.spatial, geometry.Interval):
        out["error_sign_changes_mid_time"] = pielm.oscillation_sign_changes(
            model, domain.t_final / 2
        )
    return out


def execute_run(cfg: RunConfig) -> dict:
    """Train, evaluate and write artifacts; returns the summary dict."""
    cfg.validate()
    case = _resolve_case(cfg)
    out_dir = cfg.out or os.environ.get("PIELM_OUT_DIR") or "pielm-out"
    os.makedirs(out_dir, exist_ok=True)
    try:
        model, used = _build_model(case, cfg)
    except UsageError:
        raise
    except Exception as exc:
        partial = {
            "case": case.id,
            "method": cfg.method,
            "seed": cfg.seed if cfg.seed is not None else 0,
            "failed": True,
            "failure_reason": f"{type(exc).__name__}: {exc}",
        }
        _atomic_write(os.path.join(out_dir, "summary.json"), json.dumps(partial, sort_keys=True, indent=2) + "\n")
        raise SolverFailure(str(exc)) from exc

    report = pielm.error_report(model, grid=cfg.eval_grid)
    _write_solution(out_dir, case, model, report)

    summary = {
        "case": case.id,
        "method": cfg.method,
        "seed": cfg.seed if cfg.seed is not None else 0,
        "solver": model.solution.method_used,
        "max_abs_error": report.max_abs_error,
        "l2_error": report.l2_error,
        "train_residual": model.train_residual,
        "train_time_s": model.train_time,
        "rows": model.rows,
        "cols": model.cols,
        "eval_grid": list(report.grid_shape),
        "failed": False,
    }
    if cfg.method == "pielm":
        summary["neurons"] = model.layer.n_neurons
    else:
        summary["arch"] = {
            "cells": list(model.config.cells),
            "cell_points": list(model.config.cell_points),
            "n_neurons": model.config.n_neurons,
        }
        summary["converged"] = bool(model.solution.converged)
    summary.update(_failure_metrics(case, model, report))
    _atomic_write(os.path.join(out_dir, "summary.json"), json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return summary


def execute_sweep(cfg: RunConfig, seeds) -> dict:
    """Run each seed (continuing past failures), aggregate the error stats."""
    cfg.validate()
    out_dir = cfg.out or os.environ.get("PIELM_OUT_DIR") or "pielm-out"
    os.makedirs(out_dir, exist_ok=True)
    per_seed = []
    for seed in seeds:
        sub = RunConfig(
            case=cfg.case,
            config_path=cfg.config_path,
            method=cfg.method,
            seed=int(seed),
            neurons=cfg.neurons,
            arch=cfg.arch,
            solver=cfg.solver,
            tol=cfg.tol,
            out=os.path.join(out_dir, f"seed{seed}"),
            eval_grid=cfg.eval_grid,
            case_options=cfg.case_options,
        )
        try:
            summary = execute_run(sub)
            per_seed.append(
                {"seed": int(seed), "max_abs_error": summary["max_abs_error"],
                 "l2_error": summary["l2_error"], "failed": False}
            )
        except SolverFailure as exc:
            per_seed.append({"seed": int(seed), "failed": True, "failure_reason": str(exc)})
    ok = [s["max_abs_error"] for s in per_seed if not s["failed"]]
    summary = {
        "case": cfg.case,
        "method": cfg.method,
        "seeds": [int(s) for s in seeds],
        "per_seed": per_seed,
        "median_max_abs_error": median(ok) if ok else None,
        "worst_max_abs_error": max(ok) if ok else None,
        "n_failed": sum(1 for s in per_seed if s["failed"]),
    }
    _atomic_write(os.path.join(out_dir, "summary.json"), json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return summary


def list_cases_text() -> str:
    rows = [("id", "description", "pielm [N_f,N_bc(,N_ic),N*]", "dpielm [NB,nb,N*]", "reported error")]
    for case in cases.all_cases():
        pcounts = "[" + ",".join(map(str, case.pielm_counts)) + "]" if case.pielm_counts else "-"
        darch = "[" + ",".join(map(str, case.dpielm_notation)) + "]" if case.dpielm_notation else "-"
        order = f"O({case.expected_order})" if case.expected_order else "-"
        rows.append((case.id, case.description, pcounts, darch, order))
    widths = [max(len(r[j]) for r in rows) for j in range(5)]
    lines = ["  ".join(r[j].ljust(widths[j]) for j in range(5)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="pielm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--case", help="catalog case id (tc1..tc15)")
        p.add_argument("--config", dest="config_path", help="JSON config file")
        p.add_argument("--method", default="pielm", choices=("pielm", "dpielm"))
        p.add_argument("--neurons", type=int)
        p.add_argument("--arch", help="architecture vector, e.g. 10,10,5,5,30")
        p.add_argument("--solver", choices=("svd", "qr", "ridge", "densify_svd", "iterative_lsqr"))
        p.add_argument("--tol", type=float)
        p.add_argument("--out", help="output directory (default $PIELM_OUT_DIR or ./pielm-out)")
        p.add_argument("--eval-grid", dest="eval_grid", help="per-axis grid sizes, e.g. 201 or 101,51")

    run_p = sub.add_parser("run", help="train one configuration and report errors")
    add_common(run_p)
    run_p.add_argument("--seed", type=int, default=0)

    sweep_p = sub.add_parser("sweep", help="run several seeds and aggregate")
    add_common(sweep_p)
    sweep_p.add_argument("--seeds", required=True, help="comma-separated seed list")

    sub.add_parser("list-cases", help="show the case catalog")
    return parser


def _config_from_args(args) -> RunConfig:
    if args.config_path:
        cfg = load_config_file(args.config_path)
        cfg.config_path = args.config_path
        if args.case:
            raise UsageError("exactly one of --case or --config must be given")
    else:
        cfg = RunConfig(case=args.case)
    cfg.method = args.method if args.method else cfg.method
    for name in ("neurons", "solver", "tol", "out"):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg, name, val)
    if args.arch:
        cfg.arch = tuple(int(v) for v in str(args.arch).strip("[]").split(","))
    if args.eval_grid:
        cfg.eval_grid = tuple(int(v) for v in str(args.eval_grid).split(","))
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "list-cases":
            sys.stdout.write(list_cases_text())
            return 0
        cfg = _config_from_args(args)
        if args.command == "run":
            summary = execute_run(cfg)
            sys.stdout.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
            return 0
        seeds = [int(s) for s in str(args.seeds).split(",") if s.strip()]
        if not seeds:
            raise UsageError("need at least one seed")
        summary = execute_sweep(cfg, seeds)
        sys.stdout.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
        return 0
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except SolverFailure as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
