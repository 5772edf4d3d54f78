"""Strict parsing and validation of JSON problem files.

The schema is closed: unknown fields anywhere are rejected, and every
complaint carries a JSON pointer to the offending location.  Parsing
builds real solver objects, so a file that parses is a file that runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SchemaError, ToolkitError
from .geometry import (
    Ball,
    Box,
    ConvexSet,
    HPolytope,
    PolyhedralCone,
    Simplex,
    affine_image_polytope,
)
from .gvi import IMAGE_TOL, InversionParams
from .operators import Affine, Identity, OperatorExpr, operator_from_dict
from .vi import SolverParams

KINDS = ("vi", "gvi", "coincidence", "fixed_point", "complementarity")

REQUIRED_OPERATORS = {
    "vi": ("A",),
    "gvi": ("A", "a"),
    "coincidence": ("f", "g"),
    "fixed_point": ("f",),
    "complementarity": ("T", "g"),
}

_TOP_KEYS = {
    "version",
    "kind",
    "operators",
    "set",
    "image_set",
    "domain",
    "solver",
    "inversion",
    "seed",
    "tolerances",
}

_SET_KEYS = {
    "box": {"type", "lower", "upper"},
    "ball": {"type", "center", "radius"},
    "simplex": {"type", "dim"},
    "hpolytope": {"type", "normals", "offsets"},
    "cone": {"type", "generators"},
}

_OP_KEYS = {
    "identity": {"op", "dim"},
    "constant": {"op", "value", "in_dim"},
    "affine": {"op", "matrix", "shift"},
    "rotation": {"op", "angle", "plane", "dim"},
    "pointwise": {"op", "kind", "dim"},
    "scale": {"op", "factor", "inner"},
    "sum": {"op", "left", "right"},
    "difference": {"op", "left", "right"},
    "compose": {"op", "outer", "inner"},
}

_SOLVER_KEYS = {"step", "max_iter", "residual_tol", "step_rule", "beta", "trial_cap"}
_INVERSION_KEYS = {"tol", "max_iter", "multistart", "step_control"}
_TOLERANCE_KEYS = {
    "gap",
    "coincidence",
    "complementarity",
    "pullback",
    "resolution",
    "check_samples",
}


def _need(d, key, pointer):
    if key not in d:
        raise SchemaError(f"{pointer}/{key}", "missing required field")
    return d[key]


def _expect_dict(v, pointer):
    if not isinstance(v, dict):
        raise SchemaError(pointer, f"expected an object, got {type(v).__name__}")
    return v

def _expect_number(v, pointer):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(pointer, f"expected a number, got {type(v).__name__}")
    return float(v)


def _expect_int(v, pointer):
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(pointer, f"expected an integer, got {type(v).__name__}")
    return v


def _expect_string(v, pointer):
    if not isinstance(v, str):
        raise SchemaError(pointer, f"expected a string, got {type(v).__name__}")
    return v


def _reject_unknown(d, allowed, pointer):
    for key in d:
        if key not in allowed:
            raise SchemaError(f"{pointer}/{key}", "unknown field")


def parse_set(d, pointer):
    d = _expect_dict(d, pointer)
    kind = _expect_string(_need(d, "type", pointer), f"{pointer}/type")
    if kind not in _SET_KEYS:
        raise SchemaError(f"{pointer}/type", f"unknown set type {kind!r}")
    _reject_unknown(d, _SET_KEYS[kind], pointer)
    try:
        if kind == "box":
            return Box(_need(d, "lower", pointer), _need(d, "upper", pointer))
        if kind == "ball":
            return Ball(_need(d, "center", pointer), _need(d, "radius", pointer))
        if kind == "simplex":
            return Simplex(_expect_int(_need(d, "dim", pointer), f"{pointer}/dim"))
        if kind == "hpolytope":
            return HPolytope(_need(d, "normals", pointer), _need(d, "offsets", pointer))
        return PolyhedralCone(_need(d, "generators", pointer))
    except SchemaError:
        raise
    except (ToolkitError, ValueError, TypeError) as err:
        raise SchemaError(pointer, str(err)) from err


def parse_operator(d, pointer):
    d = _expect_dict(d, pointer)
    tag = _expect_string(_need(d, "op", pointer), f"{pointer}/op")
    if tag not in _OP_KEYS:
        raise SchemaError(f"{pointer}/op", f"unknown operator {tag!r}")
    _reject_unknown(d, _OP_KEYS[tag], pointer)
    for sub in ("inner", "outer", "left", "right"):
        if sub in d:
            parse_operator(d[sub], f"{pointer}/{sub}")
    try:
        return operator_from_dict(d)
    except SchemaError:
        raise
    except (ToolkitError, ValueError, TypeError, KeyError) as err:
        raise SchemaError(pointer, str(err)) from err


def parse_solver(d, pointer):
    if d is None:
        return SolverParams()
    d = _expect_dict(d, pointer)
    _reject_unknown(d, _SOLVER_KEYS, pointer)
    kwargs = {}
    if d.get("step") is not None:
        kwargs["step"] = _expect_number(d["step"], f"{pointer}/step")
    if "max_iter" in d:
        kwargs["max_iter"] = _expect_int(d["max_iter"], f"{pointer}/max_iter")
    if "residual_tol" in d:
        kwargs["residual_tol"] = _expect_number(d["residual_tol"], f"{pointer}/residual_tol")
    if "step_rule" in d:
        kwargs["step_rule"] = _expect_string(d["step_rule"], f"{pointer}/step_rule")
    if "beta" in d:
        kwargs["beta"] = _expect_number(d["beta"], f"{pointer}/beta")
    if "trial_cap" in d:
        kwargs["trial_cap"] = _expect_int(d["trial_cap"], f"{pointer}/trial_cap")
    try:
        return SolverParams(**kwargs)
    except ValueError as err:
        raise SchemaError(pointer, str(err)) from err


def parse_inversion(d, pointer):
    if d is None:
        return InversionParams()
    d = _expect_dict(d, pointer)
    _reject_unknown(d, _INVERSION_KEYS, pointer)
    kwargs = {}
    if "tol" in d:
        kwargs["tol"] = _expect_number(d["tol"], f"{pointer}/tol")
    if "max_iter" in d:
        kwargs["max_iter"] = _expect_int(d["max_iter"], f"{pointer}/max_iter")
    if "multistart" in d:
        kwargs["multistart"] = _expect_int(d["multistart"], f"{pointer}/multistart")
    if "step_control" in d:
        kwargs["step_control"] = _expect_number(d["step_control"], f"{pointer}/step_control")
    try:
        return InversionParams(**kwargs)
    except ValueError as err:
        raise SchemaError(pointer, str(err)) from err


@dataclass
class Problem:
    """A fully parsed problem file, ready to run."""

    kind: str
    operators: dict
    feasible_set: ConvexSet
    image_set: Optional[ConvexSet]
    domain: Optional[ConvexSet]
    solver: SolverParams
    inversion: InversionParams
    seed: int
    tolerances: dict
    raw: dict


def _derive_image(mapping, base, pointer):
    """Image polytope of an affine map over a vertex-enumerable set."""
    if isinstance(mapping, Identity):
        return base
    if not isinstance(mapping, Affine):
        raise SchemaError(
            pointer, "image_set is required when the inner map is not affine"
        )
    try:
        return affine_image_polytope(base, mapping.matrix, mapping.shift)
    except ToolkitError as err:
        raise SchemaError(pointer, f"cannot derive the image set: {err}") from err


def parse_problem(data):
    """Validate ``data`` against the closed schema and build a Problem."""
    d = _expect_dict(data, "")
    _reject_unknown(d, _TOP_KEYS, "")
    version = _expect_string(_need(d, "version", ""), "/version")
    if version != "1":
        raise SchemaError("/version", f"unsupported version {version!r}")
    kind = _expect_string(_need(d, "kind", ""), "/kind")
    if kind not in KINDS:
        raise SchemaError("/kind", f"kind must be one of {', '.join(KINDS)}")
    seed = _expect_int(_need(d, "seed", ""), "/seed")

    ops_raw = _expect_dict(_need(d, "operators", ""), "/operators")
    required = REQUIRED_OPERATORS[kind]
    _reject_unknown(ops_raw, set(required), "/operators")
    operators = {}
    for name in required:
        if name not in ops_raw:
            raise SchemaError(f"/operators/{name}", f"kind {kind!r} requires operator {name!r}")
        operators[name] = parse_operator(ops_raw[name], f"/operators/{name}")

    feasible = parse_set(_need(d, "set", ""), "/set")
    solver = parse_solver(d.get("solver"), "/solver")
    inversion = parse_inversion(d.get("inversion"), "/inversion")

    tolerances = {}
    if "tolerances" in d:
        tol_raw = _expect_dict(d["tolerances"], "/tolerances")
        _reject_unknown(tol_raw, _TOLERANCE_KEYS, "/tolerances")
        for key, value in tol_raw.items():
            tolerances[key] = _expect_number(value, f"/tolerances/{key}")

    image_set = None
    domain = None
    if kind == "complementarity":
        if not isinstance(feasible, PolyhedralCone):
            raise SchemaError("/set", "complementarity requires a cone set")
        if "domain" not in d:
            raise SchemaError(
                "/domain", "complementarity requires a compact solve domain"
            )
        domain = parse_set(d["domain"], "/domain")
        if isinstance(domain, PolyhedralCone):
            raise SchemaError("/domain", "the solve domain must be a compact variant")
        if "image_set" in d:
            image_set = parse_set(d["image_set"], "/image_set")
        else:
            image_set = _derive_image(operators["g"], domain, "/image_set")
    elif kind in ("gvi", "coincidence"):
        if "domain" in d:
            raise SchemaError("/domain", f"field not allowed for kind {kind!r}")
        inner = operators["a"] if kind == "gvi" else operators["g"]
        if "image_set" in d:
            image_set = parse_set(d["image_set"], "/image_set")
        else:
            image_set = _derive_image(inner, feasible, "/image_set")
    else:
        for bad in ("image_set", "domain"):
            if bad in d:
                raise SchemaError(f"/{bad}", f"field not allowed for kind {kind!r}")

    base = domain if kind == "complementarity" else feasible
    for name, op in operators.items():
        if op.in_dim != base.dim:
            raise SchemaError(
                f"/operators/{name}",
                f"operator input dimension {op.in_dim} does not match the set dimension {base.dim}",
            )
    if image_set is not None:
        inner_name = {"gvi": "a", "coincidence": "g", "complementarity": "g"}[kind]
        if image_set.dim != operators[inner_name].out_dim:
            raise SchemaError(
                "/image_set",
                f"image dimension {image_set.dim} does not match the range of {inner_name!r}",
            )

    return Problem(
        kind=kind,
        operators=operators,
        feasible_set=feasible,
        image_set=image_set,
        domain=domain,
        solver=solver,
        inversion=inversion,
        seed=seed,
        tolerances=tolerances,
        raw=d,
    )


def validate(data):
    """Diagnostics for a problem file without running it.

    Returns a list of ``{"severity", "pointer", "message"}`` entries:
    schema violations as errors, plus sampled image-consistency warnings
    for kinds that declare an image set.
    """
    diagnostics = []
    try:
        problem = parse_problem(data)
    except SchemaError as err:
        diagnostics.append(
            {"severity": "error", "pointer": err.pointer, "message": err.reason}
        )
        return diagnostics

    inner_name = {"gvi": "a", "coincidence": "g", "complementarity": "g"}.get(problem.kind)
    if inner_name and problem.image_set is not None:
        inner = problem.operators[inner_name]
        base = problem.domain if problem.kind == "complementarity" else problem.feasible_set
        try:
            rng = np.random.default_rng(problem.seed)
            pts = np.atleast_2d(base.sample(rng, 64))
        except Exception:
            pts = None
        if pts is not None:
            worst, witness = 0.0, None
            for x in pts:
                dist = problem.image_set.distance(np.asarray(inner(x), dtype=float))
                if dist > worst:
                    worst, witness = dist, x
            if worst > IMAGE_TOL:
                diagnostics.append(
                    {
                        "severity": "warning",
                        "pointer": "/image_set",
                        "message": (
                            f"declared image misses {inner_name}(x) by {worst:.3e} "
                            f"at x={witness.tolist()}"
                        ),
                    }
                )
    return diagnostics
