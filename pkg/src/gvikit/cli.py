"""Command-line front end: JSON problem files in, one JSON report out.

stdout carries exactly one JSON document per invocation so output can be
piped; human-readable summaries go to stderr.  Exit codes: 0 when the
run certifies (or a check/validation passes), 1 for numerical failures
and refuted hypotheses, 2 for schema violations.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .coincidence import CoincidenceProblem, find_coincidence, precheck
from .demos import DEMOS, get_demo
from .errors import CertificationFailed, SchemaError, ToolkitError
from .gvi import (
    GAP_TOL,
    GviProblem,
    check_selection_independence,
    complementarity_check,
)
from .gvi import solve_gvi
from .operators import (
    Affine,
    Identity,
    SampleConfig,
    affine_relative_monotone,
    check_fiber_condition,
    check_monotone_relative,
    check_ql,
)
from .oracle import brute_coincidence, brute_gap
from .schema import parse_problem, validate

# Sampled checks at the CLI run against this tolerance rather than the
# library default 1e-9: several checks compare values recovered through
# numerical preimage searches, whose noise sits just above 1e-9.
CHECK_TOL = 1e-6
DEFAULT_CHECK_SAMPLES = 200
DEFAULT_RESOLUTION = 0.05
COMPLEMENTARITY_TOL = 1e-8

_LOAD_BEARING = {
    "monotone_relative": True,
    "affine_relative_monotone": True,
    "range_inclusion": True,
    "g_pseudocontractive": True,
    "fiber_condition": True,
    "selection_independence": True,
    "ql": False,
    "g_nonexpansive": False,
}

_COMMAND_KINDS = {
    "solve-vi": ("vi",),
    "solve-gvi": ("gvi", "complementarity"),
    "find-coincidence": ("coincidence",),
    "find-fixed-point": ("fixed_point",),
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {key: _jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _check_cfg(problem):
    samples = int(problem.tolerances.get("check_samples", DEFAULT_CHECK_SAMPLES))
    return SampleConfig(seed=problem.seed, samples=samples, tol=CHECK_TOL)


def _monotone_report(T, t, K, cfg):
    """Analytic verdict for affine pairs, sampled verdict otherwise."""
    if isinstance(T, Affine) and isinstance(t, (Affine, Identity)):
        g = t.matrix if isinstance(t, Affine) else np.eye(T.in_dim)
        if T.matrix.shape[0] == T.matrix.shape[1] and T.matrix.shape == g.shape:
            return affine_relative_monotone(T.matrix, g)
    return check_monotone_relative(T, t, K, cfg)


def _coincidence_problem(problem, tol):
    f = problem.operators["f"]
    g = problem.operators.get("g") or Identity(problem.feasible_set.dim)
    image = problem.image_set if problem.image_set is not None else problem.feasible_set
    return CoincidenceProblem(
        f=f,
        g=g,
        K=problem.feasible_set,
        image_gK=image,
        params=problem.solver,
        inversion=problem.inversion,
        coincidence_tol=tol,
    )


def _pair_for_kind(problem):
    """(outer, inner, solve set) for the gap-style kinds."""
    if problem.kind == "vi":
        return (
            problem.operators["A"],
            Identity(problem.feasible_set.dim),
            problem.feasible_set,
        )
    if problem.kind == "gvi":
        return problem.operators["A"], problem.operators["a"], problem.feasible_set
    return problem.operators["T"], problem.operators["g"], problem.domain


def _battery(problem, coincidence_tol):
    cfg = _check_cfg(problem)
    kind = problem.kind
    if kind == "vi":
        A, ident, K = _pair_for_kind(problem)
        return [_monotone_report(A, ident, K, cfg)]
    if kind in ("gvi", "complementarity"):
        outer, inner, base = _pair_for_kind(problem)
        return [
            _monotone_report(outer, inner, base, cfg),
            check_ql(inner, base, cfg),
            check_fiber_condition(outer, inner, base, cfg, problem.inversion),
        ]
    cp = _coincidence_problem(problem, coincidence_tol)
    reports = precheck(cp, cfg)
    if kind == "coincidence":
        reports.append(check_ql(cp.g, cp.K, cfg))
    return reports


def _tolerance(problem, key, flag, default):
    if flag is not None:
        return float(flag)
    return float(problem.tolerances.get(key, default))


def _oracle_section(problem, solution, resolution, gap_tol):
    try:
        if problem.kind in ("vi", "gvi", "complementarity"):
            outer, inner, base = _pair_for_kind(problem)
            gap = brute_gap(outer, inner, base, solution, resolution)
            return {
                "resolution": resolution,
                "gap": gap,
                "refutes": bool(gap < -gap_tol),
            }
        cp = _coincidence_problem(problem, tol=gap_tol)
        point, residual = brute_coincidence(cp.f, cp.g, cp.K, resolution)
        return {
            "resolution": resolution,
            "point": point.tolist(),
            "residual": residual,
            "distance_to_solution": float(np.linalg.norm(point - solution)),
        }
    except ToolkitError as err:
        return {"resolution": resolution, "error": str(err)}


def run_problem(problem, certify=False, resolution=None, tol=None):
    """Solve one parsed problem and assemble the run report.

    Returns ``(report_dict, exit_code)``.  Certification means every
    residual-level test passed; hypothesis checks can refute a run but
    never substitute for the residual certificates.
    """
    t_start = time.perf_counter()
    kind = problem.kind
    gap_tol = _tolerance(problem, "gap", tol if kind in ("vi", "gvi") else None, GAP_TOL)
    coin_tol = _tolerance(
        problem, "coincidence", tol if kind in ("coincidence", "fixed_point") else None, 1e-6
    )
    comp_tol = _tolerance(
        problem, "complementarity", tol if kind == "complementarity" else None,
        COMPLEMENTARITY_TOL,
    )
    pullback_tol = _tolerance(
        problem, "pullback", None, max(1e-7, 10.0 * problem.inversion.tol)
    )
    resolution = (
        float(resolution)
        if resolution is not None
        else float(problem.tolerances.get("resolution", DEFAULT_RESOLUTION))
    )

    battery = [report.to_dict() for report in _battery(problem, coin_tol)]

    report = {
        "tool": "gvikit",
        "tool_version": __version__,
        "kind": kind,
        "problem": problem.raw,
        "solution": None,
        "reduced_solution": None,
        "residuals": {},
        "iterations": 0,
        "converged": False,
        "step_used": None,
        "hypothesis_reports": battery,
        "timings": {},
        "exit_status": "failed",
    }

    certified = False
    converged = False
    error = None
    t_solve = time.perf_counter()
    try:
        if kind in ("vi", "gvi", "complementarity"):
            outer, inner, base = _pair_for_kind(problem)
            image = problem.image_set if kind != "vi" else problem.feasible_set
            gvi_problem = GviProblem(
                A=outer,
                a=inner,
                K=base,
                image_aK=image,
                params=problem.solver,
                inversion=problem.inversion,
            )
            rep = solve_gvi(gvi_problem)
            if kind == "gvi":
                battery.append(
                    check_selection_independence(gvi_problem, rep.solution).to_dict()
                )
            report["residuals"] = {
                "natural": rep.residual,
                "gap": rep.gap_certificate,
                "pullback": rep.pullback_residual,
            }
            converged = rep.converged
            certified = (
                converged
                and rep.gap_certificate >= -gap_tol
                and rep.pullback_residual <= pullback_tol
            )
            if kind == "complementarity":
                comp = complementarity_check(
                    problem.operators["T"],
                    problem.operators["g"],
                    problem.feasible_set,
                    rep.solution,
                    tol=comp_tol,
                )
                report["complementarity"] = comp.to_dict()
                certified = certified and comp.ok
        else:
            cp = _coincidence_problem(problem, coin_tol)
            rep = find_coincidence(cp)
            report["residuals"] = {
                "natural": rep.residual,
                "gap": rep.gap_certificate,
                "pullback": rep.pullback_residual,
                "coincidence": rep.coincidence_residual,
            }
            converged = rep.converged
            certified = rep.certified and rep.gap_certificate >= -gap_tol
        report["solution"] = rep.solution
        report["reduced_solution"] = rep.reduced_solution
        report["iterations"] = rep.iterations
        report["step_used"] = rep.step_used
    except CertificationFailed as err:
        converged = True
        report["solution"] = err.solution
        report["residuals"] = {"coincidence": err.residual}
        error = {"type": "CertificationFailed", "message": str(err)}
    except ToolkitError as err:
        error = {"type": type(err).__name__, "message": str(err)}
    solve_seconds = time.perf_counter() - t_solve

    report["converged"] = converged
    for entry in battery:
        entry["load_bearing"] = _LOAD_BEARING.get(entry["property"], False)

    if certify and report["solution"] is not None:
        oracle = _oracle_section(
            problem, np.asarray(report["solution"], dtype=float), resolution, gap_tol
        )
        report["oracle"] = oracle
        if oracle.get("refutes"):
            certified = False

    refuted = any(
        entry["verdict"] == "violated" and entry["load_bearing"] for entry in battery
    )
    if certified:
        status = "certified"
    elif error is not None and error["type"] == "CertificationFailed":
        status = "refuted_hypothesis"
    elif refuted:
        status = "refuted_hypothesis"
    elif report.get("oracle", {}).get("refutes"):
        status = "failed"
    elif converged and error is None:
        status = "solved_uncertified"
    else:
        status = "failed"
    if error is not None:
        report["error"] = error
    report["exit_status"] = status
    report["timings"] = {
        "solve_s": solve_seconds,
        "total_s": time.perf_counter() - t_start,
    }
    return _jsonable(report), 0 if status == "certified" else 1


def run_check(problem):
    """Hypothesis battery only; exit 0 when nothing load-bearing fails."""
    t_start = time.perf_counter()
    coin_tol = _tolerance(problem, "coincidence", None, 1e-6)
    battery = [report.to_dict() for report in _battery(problem, coin_tol)]
    for entry in battery:
        entry["load_bearing"] = _LOAD_BEARING.get(entry["property"], False)
    refuted = any(
        entry["verdict"] == "violated" and entry["load_bearing"] for entry in battery
    )
    report = {
        "tool": "gvikit",
        "tool_version": __version__,
        "kind": problem.kind,
        "problem": problem.raw,
        "hypothesis_reports": battery,
        "timings": {"total_s": time.perf_counter() - t_start},
        "exit_status": "refuted_hypothesis" if refuted else "checks_passed",
    }
    return _jsonable(report), 1 if refuted else 0


def _load_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise SchemaError("", f"cannot read {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise SchemaError("", f"not valid JSON: {err}") from err


def _emit(report, code, args, summary):
    print(json.dumps(report, indent=2))
    if not getattr(args, "quiet", False):
        print(summary, file=sys.stderr)
    return code


def _summary_line(report):
    status = report["exit_status"]
    solution = report.get("solution")
    if solution is None:
        return f"gvikit: {report['kind']} -> {status}"
    residuals = report.get("residuals", {})
    parts = [f"solution {np.asarray(solution)}"]
    for key in ("gap", "coincidence"):
        if key in residuals:
            parts.append(f"{key} {residuals[key]:.2e}")
    return f"gvikit: {report['kind']} -> {status} ({', '.join(parts)})"


def _parser():
    parser = argparse.ArgumentParser(
        prog="gvikit",
        description="Solve and certify variational inequalities with composed maps, "
        "coincidence problems, and fixed points over convex sets.",
    )
    parser.add_argument("--version", action="version", version=f"gvikit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(sp, with_oracle=True):
        sp.add_argument("--tol", type=float, default=None, help="certification tolerance override")
        if with_oracle:
            sp.add_argument(
                "--certify", action="store_true", help="attach grid-oracle evidence"
            )
            sp.add_argument(
                "--resolution", type=float, default=None, help="oracle grid spacing"
            )
        sp.add_argument("--quiet", action="store_true", help="suppress the stderr summary")

    for name in ("solve-vi", "solve-gvi", "find-coincidence", "find-fixed-point"):
        sp = sub.add_parser(name, help=f"run a problem file of kind {_COMMAND_KINDS[name]}")
        sp.add_argument("file")
        solver_flags(sp)

    sp = sub.add_parser("check", help="run only the hypothesis battery of a problem file")
    sp.add_argument("file")
    sp.add_argument("--quiet", action="store_true")

    sp = sub.add_parser("certify", help="solve any kind and always attach the grid oracle")
    sp.add_argument("file")
    solver_flags(sp, with_oracle=False)
    sp.add_argument("--resolution", type=float, default=None, help="oracle grid spacing")

    sp = sub.add_parser("validate", help="schema-check a problem file without running it")
    sp.add_argument("file")
    sp.add_argument("--quiet", action="store_true")

    sp = sub.add_parser("demo", help="run a built-in demonstration problem")
    sp.add_argument("name")
    solver_flags(sp)

    sub.add_parser("list-demos", help="list the built-in demonstrations")
    return parser


def _dispatch(args):
    command = args.command
    if command == "list-demos":
        listing = {
            "demos": [
                {
                    "name": name,
                    "kind": entry["problem"]["kind"],
                    "title": entry["title"],
                    "summary": entry["summary"],
                }
                for name, entry in DEMOS.items()
            ]
        }
        print(json.dumps(listing, indent=2))
        return 0

    if command == "demo":
        try:
            entry = get_demo(args.name)
        except KeyError as err:
            print(str(err.args[0]), file=sys.stderr)
            return 2
        problem = parse_problem(entry["problem"])
        report, code = run_problem(
            problem,
            certify=args.certify,
            resolution=args.resolution,
            tol=args.tol,
        )
        report["demo"] = args.name
        report["demo_expected"] = entry.get("expect")
        return _emit(report, code, args, _summary_line(report))

    data = _load_file(args.file)

    if command == "validate":
        diagnostics = validate(data)
        errors = [d for d in diagnostics if d["severity"] == "error"]
        report = {
            "tool": "gvikit",
            "tool_version": __version__,
            "diagnostics": diagnostics,
            "exit_status": "schema_error" if errors else "valid",
        }
        return _emit(
            report,
            2 if errors else 0,
            args,
            f"gvikit: validate -> {report['exit_status']} "
            f"({len(errors)} error(s), {len(diagnostics) - len(errors)} warning(s))",
        )

    problem = parse_problem(data)
    expected = _COMMAND_KINDS.get(command)
    if expected is not None and problem.kind not in expected:
        raise SchemaError(
            "/kind",
            f"command {command!r} handles kinds {', '.join(expected)}; "
            f"this file has kind {problem.kind!r}",
        )

    if command == "check":
        report, code = run_check(problem)
        return _emit(report, code, args, f"gvikit: check -> {report['exit_status']}")

    report, code = run_problem(
        problem,
        certify=(command == "certify") or getattr(args, "certify", False),
        resolution=args.resolution,
        tol=args.tol,
    )
    return _emit(report, code, args, _summary_line(report))


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SchemaError as err:
        report = {
            "exit_status": "schema_error",
            "error": {"pointer": err.pointer, "message": err.reason},
        }
        print(json.dumps(report, indent=2))
        if not getattr(args, "quiet", False):
            print(
                f"gvikit: schema error at {err.pointer or '<root>'}: {err.reason}",
                file=sys.stderr,
            )
        return 2
    except ToolkitError as err:
        report = {
            "exit_status": "failed",
            "error": {"type": type(err).__name__, "message": str(err)},
        }
        print(json.dumps(report, indent=2))
        if not getattr(args, "quiet", False):
            print(f"gvikit: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
