"""Coincidence and fixed points via the variational-inequality route.

A coincidence point of the pair (f, g) satisfies f(x) = g(x).  Solving
the general variational inequality with ``A = g - f`` and ``a = g`` finds
one: at a solution the probe ``y = g^{-1}(f(x))`` forces
``-|f(x) - g(x)|^2 >= 0``, so the coincidence residual collapses whenever
``f(K)`` sits inside ``g(K)``.  Fixed points are the ``g = identity``
special case.

``find_coincidence`` certifies the residual explicitly instead of trusting
that argument: a solved inequality whose residual stays large is reported
as ``CertificationFailed`` together with hypothesis-check reports that
usually explain which assumption broke.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CertificationFailed, InversionFailed
from .geometry import ConvexSet, as_vector
from .gvi import (
    GAP_TOL,
    GviProblem,
    GviSolveReport,
    InversionParams,
    default_gap_probes,
    gvi_gap,
    select_preimage,
    solve_gvi,
)
from .operators import (
    Difference,
    Identity,
    OperatorExpr,
    SampleConfig,
    check_fiber_condition,
    check_g_nonexpansive,
    check_g_pseudocontractive,
    check_range_inclusion,
)
from .vi import SolverParams

COINCIDENCE_TOL = 1e-6
_PRECHECK_SEED = 52802179


@dataclass
class CoincidenceProblem:
    """The pair (f, g) on K together with the declared image of g."""

    f: OperatorExpr
    g: OperatorExpr
    K: ConvexSet
    image_gK: ConvexSet
    params: SolverParams = field(default_factory=SolverParams)
    inversion: InversionParams = field(default_factory=InversionParams)
    coincidence_tol: float = COINCIDENCE_TOL


@dataclass
class CoincidenceReport(GviSolveReport):
    coincidence_residual: float = np.inf
    certified: bool = False


def _as_gvi(problem):
    return GviProblem(
        A=Difference(problem.g, problem.f),
        a=problem.g,
        K=problem.K,
        image_aK=problem.image_gK,
        params=problem.params,
        inversion=problem.inversion,
    )


def precheck(problem, cfg=None):
    """Hypothesis reports for the pair, in load-bearing order.

    Range inclusion of f(K) in g(K), the relative pseudocontractivity
    inequality, plain g-nonexpansiveness (a stronger sufficient
    condition), and the fiber condition for the reduction.
    """
    cfg = cfg if cfg is not None else SampleConfig(seed=_PRECHECK_SEED, samples=200)
    gvi_problem = _as_gvi(problem)
    return [
        check_range_inclusion(
            problem.f, problem.g, problem.K, problem.image_gK, cfg, problem.inversion
        ),
        check_g_pseudocontractive(problem.f, problem.g, problem.K, cfg),
        check_g_nonexpansive(problem.f, problem.g, problem.K, cfg),
        check_fiber_condition(
            gvi_problem.A, gvi_problem.a, problem.K, cfg, problem.inversion
        ),
    ]


def find_coincidence(problem, x0=None):
    """Solve for a coincidence point and certify its residual.

    Returns a report whose ``certified`` flag states that
    ``|f(x) - g(x)| <= coincidence_tol``.  A non-converged inner solve
    comes back uncertified with the best residual found; a converged solve
    that still misses the tolerance raises ``CertificationFailed`` carrying
    the precheck reports, because that outcome indicates a violated
    hypothesis rather than a solver failure.
    """
    gvi_problem = _as_gvi(problem)
    rep = solve_gvi(gvi_problem, x0=x0)
    x = rep.solution
    fx = np.asarray(problem.f(x), dtype=float)
    gx = np.asarray(problem.g(x), dtype=float)
    residual = float(np.linalg.norm(fx - gx))

    # sharpen the gap certificate with the proof probe g^{-1}(f(x))
    gap = rep.gap_certificate
    try:
        y_probe = select_preimage(problem.g, problem.K, fx, problem.inversion)
        probes = default_gap_probes(problem.K) + [y_probe]
        gap = gvi_gap(gvi_problem, x, probes=probes)
    except InversionFailed:
        pass

    certified = bool(rep.converged and residual <= problem.coincidence_tol)
    report = CoincidenceReport(
        solution=x,
        residual=rep.residual,
        iterations=rep.iterations,
        converged=rep.converged,
        step_used=rep.step_used,
        gap_certificate=gap,
        history=rep.history,
        reduced_solution=rep.reduced_solution,
        pullback_residual=rep.pullback_residual,
        coincidence_residual=residual,
        certified=certified,
    )
    if rep.converged and not certified:
        raise CertificationFailed(
            f"variational inequality solved but |f(x) - g(x)| = {residual:.3e} "
            f"exceeds {problem.coincidence_tol}",
            solution=x,
            residual=residual,
            reports=precheck(problem),
        )
    return report


def find_fixed_point(f, K, params=None, inversion=None, tol=COINCIDENCE_TOL, x0=None):
    """Fixed point of f on K as the coincidence of (f, identity).

    Runs a sampled self-map check first; a violated report does not abort
    the solve (the condition is sufficient, not necessary) but is attached
    to the returned report as ``self_map_report``.
    """
    g = Identity(K.dim)
    problem = CoincidenceProblem(
        f=f,
        g=g,
        K=K,
        image_gK=K,
        params=params if params is not None else SolverParams(),
        inversion=inversion if inversion is not None else InversionParams(),
        coincidence_tol=tol,
    )
    cfg = SampleConfig(seed=_PRECHECK_SEED, samples=200)
    self_map = check_range_inclusion(f, g, K, K, cfg, problem.inversion)
    report = find_coincidence(problem, x0=x0)
    report.self_map_report = self_map
    return report
