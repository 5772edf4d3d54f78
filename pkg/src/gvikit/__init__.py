"""Solvers and certification tools for variational inequalities on convex sets.

The package solves the general variational inequality: find x in K with
``<A(x), a(y) - a(x)> >= 0`` for all y in K.  When ``a`` is the identity
this is the classical Stampacchia problem; otherwise the solver inverts
``a`` numerically, solves the reduced problem on the image set, and pulls
the solution back.  Coincidence points (f(x) = g(x)) and fixed points are
obtained from the same pipeline with ``A = g - f`` and ``a = g``, and a
brute-force grid oracle provides independent certification at desk scale.
"""

from .errors import (
    CertificationFailed,
    DimensionMismatch,
    DimensionTooLarge,
    EmptyGrid,
    EmptySet,
    InversionFailed,
    NonConvergence,
    SchemaError,
    ToolkitError,
    UnboundedSet,
    UnsupportedVariant,
)
from .geometry import (
    Ball,
    Box,
    ConvexSet,
    HPolytope,
    PolyhedralCone,
    Simplex,
    affine_image_polytope,
    contains,
    project,
    segment_distance,
    set_from_dict,
    vertices,
)
from .operators import (
    Affine,
    Compose,
    Constant,
    Difference,
    Identity,
    OperatorExpr,
    PointwiseNonlinear,
    PropertyReport,
    Rotation,
    SampleConfig,
    Scale,
    Sum,
    affine_relative_monotone,
    check_fiber_condition,
    check_g_nonexpansive,
    check_g_pseudocontractive,
    check_monotone_relative,
    check_ql,
    check_range_inclusion,
    evaluate,
    jacobian_fd,
    operator_from_dict,
)
from .vi import (
    SolveReport,
    SolverParams,
    natural_residual,
    solve_extragradient,
    solve_projection,
)
from .gvi import (
    GviProblem,
    GviSolveReport,
    InversionParams,
    ReducedOperator,
    check_selection_independence,
    complementarity_check,
    gvi_gap,
    preimage_candidates,
    select_preimage,
    solve_gvi,
)
from .coincidence import (
    CoincidenceProblem,
    CoincidenceReport,
    find_coincidence,
    find_fixed_point,
    precheck,
)
from .oracle import brute_coincidence, brute_gap, brute_vi_solve, grid_points
from .schema import Problem, parse_problem, validate
from .demos import DEMOS, demo_names, get_demo

__version__ = "0.1.0"

__all__ = [
    "DEMOS",
    "Affine",
    "Ball",
    "Box",
    "CertificationFailed",
    "CoincidenceProblem",
    "CoincidenceReport",
    "Compose",
    "Constant",
    "ConvexSet",
    "Difference",
    "DimensionMismatch",
    "DimensionTooLarge",
    "EmptyGrid",
    "EmptySet",
    "GviProblem",
    "GviSolveReport",
    "HPolytope",
    "Identity",
    "InversionFailed",
    "InversionParams",
    "NonConvergence",
    "OperatorExpr",
    "PointwiseNonlinear",
    "PolyhedralCone",
    "Problem",
    "PropertyReport",
    "ReducedOperator",
    "Rotation",
    "SampleConfig",
    "Scale",
    "SchemaError",
    "Simplex",
    "SolveReport",
    "SolverParams",
    "Sum",
    "ToolkitError",
    "UnboundedSet",
    "UnsupportedVariant",
    "affine_image_polytope",
    "affine_relative_monotone",
    "brute_coincidence",
    "brute_gap",
    "brute_vi_solve",
    "check_fiber_condition",
    "check_g_nonexpansive",
    "check_g_pseudocontractive",
    "check_monotone_relative",
    "check_ql",
    "check_range_inclusion",
    "check_selection_independence",
    "complementarity_check",
    "contains",
    "demo_names",
    "evaluate",
    "find_coincidence",
    "find_fixed_point",
    "get_demo",
    "grid_points",
    "gvi_gap",
    "jacobian_fd",
    "natural_residual",
    "operator_from_dict",
    "parse_problem",
    "precheck",
    "preimage_candidates",
    "project",
    "segment_distance",
    "select_preimage",
    "set_from_dict",
    "solve_extragradient",
    "solve_gvi",
    "solve_projection",
    "validate",
    "vertices",
]
