"""Command-line front end: ``cframe analyze|dual|verify-pair|check``.

Reports are UTF-8 JSON with a fixed field order.  Exit codes: 0 success,
1 error (bad config, mismatched measures, bad parameters), 2 not a frame
or not a dual pair, 3 quadrature flagged unconverged.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .config import (
    JobConfig,
    config_digest,
    config_to_dict,
    format_float,
    format_real,
    format_scalar,
    frame_to_dict,
    load_config,
    preset,
    with_overrides,
)
from .cstar import ToleranceConfig
from .duality import canonical_dual, is_dual_pair, riesz_type_check
from .errors import CFrameError, ParameterError
from .frames import UNCONVERGED_DELTA, classify, verify_operator_identities
from .hilbert import flatten
from .measure import AtomicMeasure
from .suite import SUITES, run_suite

EXIT_OK, EXIT_ERROR, EXIT_NOT_FRAME, EXIT_UNCONVERGED = 0, 1, 2, 3


def _matrix(op) -> list:
    flat = flatten(op)
    return [[format_scalar(x) for x in row] for row in flat]


def _tolerances(cfg: ToleranceConfig) -> dict:
    return {
        "positivity_tol": cfg.positivity_tol,
        "equality_tol": cfg.equality_tol,
        "invertibility_tol": cfg.invertibility_tol,
        "eig_tol": cfg.eig_tol,
    }


def _bounds_section(report, cfg: ToleranceConfig) -> dict:
    ex = report.exact
    return {
        "lower": format_real(report.lower_bound),
        "upper": format_real(report.upper_bound),
        "exact": ex,
        "tolerance": None if ex else cfg.positivity_tol,
    }


def _flags_section(report) -> dict:
    delta = report.quadrature_delta
    return {
        "is_frame": report.is_frame,
        "is_tight": report.is_tight,
        "is_bessel": report.is_bessel,
        "quadrature_delta": None if delta is None else format_float(delta),
        "quadrature_tolerance": UNCONVERGED_DELTA,
        "converged": report.converged,
    }


def _checks_section(checks) -> dict:
    return {
        name: {"pass": c.passed, "residual": format_float(c.residual), "tolerance": format_float(c.tolerance)}
        for name, c in checks.items()
    }


def _provenance(job: JobConfig) -> dict:
    return {
        "config_digest": config_digest(job),
        "grid_size": job.grid_size,
        "scalar_mode": job.algebra.scalar_mode,
        "tool_version": __version__,
    }


def _residual(x):
    return str(x) if isinstance(x, Fraction) else format_float(x)


def _frame_summary(F, job: JobConfig) -> tuple[dict, object]:
    report = classify(F, job.tolerances, job.grid_size)
    return {
        "bounds": _bounds_section(report, job.tolerances),
        "flags": _flags_section(report),
        "moment": _matrix(report.moment),
    }, report


def _status(report) -> int:
    if not report.converged:
        return EXIT_UNCONVERGED
    if not report.is_frame:
        return EXIT_NOT_FRAME
    return EXIT_OK


def cmd_analyze(job: JobConfig, seed: int = 0) -> tuple[dict, int]:
    summary, report = _frame_summary(job.frame, job)
    checks = verify_operator_identities(job.frame, job.tolerances, job.grid_size, seed=seed)
    out = {"command": "analyze"}
    out.update(summary)
    out["checks"] = _checks_section(checks)
    out["tolerances"] = _tolerances(job.tolerances)
    out["provenance"] = _provenance(job)
    out["config"] = config_to_dict(job)
    return out, _status(report)


def cmd_dual(job: JobConfig, seed: int = 0) -> tuple[dict, int]:
    cfg = job.tolerances
    summary, report = _frame_summary(job.frame, job)
    out = {"command": "dual"}
    out.update(summary)
    if not report.is_frame:
        out["dual"] = None
        out["error"] = f"not a frame: smallest eigenvalue of the moment matrix is {report.lower_bound}"
        code = EXIT_NOT_FRAME
    else:
        G = canonical_dual(job.frame, cfg, job.grid_size)
        pair = is_dual_pair(job.frame, G, cfg, job.grid_size)
        g_report = classify(G, cfg, job.grid_size)
        section = {
            "frame": frame_to_dict(G),
            "bounds": _bounds_section(g_report, cfg),
            "cross_moment_residual": _residual(pair.identity_residual),
            "residual_tolerance": None if pair.exact else cfg.equality_tol,
            "is_dual_pair": pair.is_dual_pair,
        }
        if isinstance(job.measure, AtomicMeasure):
            section["riesz_type"] = riesz_type_check(job.frame, cfg).riesz_type
        out["dual"] = section
        code = _status(report)
    out["tolerances"] = _tolerances(cfg)
    out["provenance"] = _provenance(job)
    out["config"] = config_to_dict(job)
    return out, code


def cmd_verify_pair(job: JobConfig, seed: int = 0) -> tuple[dict, int]:
    if job.second_frame is None:
        raise ParameterError("verify-pair needs a config with a second_frame")
    cfg = job.tolerances
    F, G = job.frame, job.second_frame
    pair = is_dual_pair(F, G, cfg, job.grid_size)
    back = is_dual_pair(G, F, cfg, job.grid_size)
    f_summary, f_report = _frame_summary(F, job)
    g_summary, g_report = _frame_summary(G, job)
    out = {
        "command": "verify-pair",
        "verdict": "dual-pair" if pair.is_dual_pair else "not-dual-pair",
        "cross_moment": _matrix(pair.cross_moment),
        "cross_moment_residual": _residual(pair.identity_residual),
        "residual_tolerance": None if pair.exact else cfg.equality_tol,
        "exact": pair.exact,
        "symmetric_verdict": back.is_dual_pair,
        "frame": f_summary,
        "second_frame": g_summary,
        "tolerances": _tolerances(cfg),
        "provenance": _provenance(job),
        "config": config_to_dict(job),
    }
    if not (f_report.converged and g_report.converged):
        return out, EXIT_UNCONVERGED
    return out, EXIT_OK if pair.is_dual_pair else EXIT_NOT_FRAME


COMMANDS = {"analyze": cmd_analyze, "dual": cmd_dual, "verify-pair": cmd_verify_pair}


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _env_tolerance():
    raw = os.environ.get("CFRAME_TOLERANCE")
    if raw is None or raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ParameterError(f"CFRAME_TOLERANCE must be a number, got {raw!r}") from None
    if not value >= 0 or value == float("inf"):
        raise ParameterError(f"CFRAME_TOLERANCE must be a finite nonnegative number, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cframe",
        description="Frame bounds, frame operators and duals for frame maps over matrix C*-algebras.",
    )
    p.add_argument("command", choices=("analyze", "dual", "verify-pair", "check"))
    p.add_argument("config", nargs="?", help="JSON job configuration")
    p.add_argument("--example", metavar="NAME", help="built-in preset (paper-2.8, paper-3.4)")
    p.add_argument("--grid", type=int, metavar="N", help="quadrature panels (>= 2)")
    p.add_argument("--exact", action="store_true", help="force rational scalar mode")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled checks and suites")
    p.add_argument("--cases", type=int, default=100, help="random cases per suite")
    p.add_argument("--suite", default="all", help="property suite: " + ", ".join(SUITES))
    return p


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_job(args, tol_override) -> JobConfig:
    mode = "rational" if args.exact else None
    if args.example and args.config:
        raise ParameterError("give either a config path or --example, not both")
    if args.example:
        job = preset(args.example, mode)
    elif args.config:
        job = load_config(args.config, mode)
    else:
        raise ParameterError("a config path or --example is required")
    if args.grid is not None and args.grid < 2:
        raise ParameterError(f"--grid must be >= 2, got {args.grid}")
    return with_overrides(job, args.grid, tol_override)


def run_check(args, tol_override) -> int:
    cfg = ToleranceConfig(equality_tol=tol_override) if tol_override is not None else ToleranceConfig()
    report = run_suite(args.suite, args.seed, args.cases, cfg)
    lines = [f"suite={report.suite} seed={report.seed} cases={report.cases}"]
    lines.extend(report.lines())
    for prop in report.properties.values():
        lines.extend(f"  failure {prop.name}: {f}" for f in prop.failures)
    lines.append("all properties pass" if report.all_passed else "FAILURES")
    text = "\n".join(lines) + "\n"
    if args.out:
        summary = {
            "command": "check",
            "suite": report.suite,
            "seed": report.seed,
            "cases": report.cases,
            "all_passed": report.all_passed,
            "properties": {
                p.name: {
                    "passed": p.passed,
                    "total": p.total,
                    "worst_residual": format_float(p.worst_residual),
                    "tolerance": format_float(p.tolerance),
                }
                for p in report.properties.values()
            },
        }
        _emit(dumps_report(summary), args.out)
    sys.stdout.write(text)
    return EXIT_OK if report.all_passed else EXIT_NOT_FRAME


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _env_tolerance()
        if args.command == "check":
            return run_check(args, tol)
        job = _load_job(args, tol)
        report, code = COMMANDS[args.command](job, args.seed)
        _emit(dumps_report(report), args.out)
        return code
    except (CFrameError, ValueError, ArithmeticError, OSError) as e:
        sys.stderr.write(f"cframe: error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
