"""Projection-type solvers for Stampacchia variational inequalities.

Both solvers run the natural map ``x -> P_C(x - step * F(x))`` and stop on
its fixed-point residual.  The plain projection method needs strong
monotonicity to converge; the extragradient method adds a predictor
evaluation and converges for merely monotone Lipschitz operators, which is
what the reduced problems produced elsewhere in this package look like.

Failure to converge is an ordinary outcome here, reported through the
``converged`` flag rather than an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .geometry import as_vector
from .operators import OperatorExpr

RESIDUAL_TOL = 1e-8
MAX_ITER = 200_000

# extragradient accepts a step once step * |F(x) - F(y)| <= _NU * |x - y|
_NU = 0.9
_LIPSCHITZ_PROBE_SEED = 20240915
_LIPSCHITZ_PROBE_PAIRS = 64


@dataclass
class SolverParams:
    """Step size and termination policy.

    ``step=None`` selects the step automatically: ``0.9 / L`` when an
    exact Lipschitz bound is derivable from the operator expression,
    otherwise backtracking from a sampled estimate.
    """

    step: Optional[float] = None
    max_iter: int = MAX_ITER
    residual_tol: float = RESIDUAL_TOL
    step_rule: str = "fixed"  # "fixed" | "backtracking"
    beta: float = 0.5
    trial_cap: int = 30

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError("step_rule must be 'fixed' or 'backtracking'")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.trial_cap < 1:
            raise ValueError("trial_cap must be positive")


@dataclass
class SolveReport:
    solution: np.ndarray
    residual: float
    iterations: int
    converged: bool
    step_used: float
    gap_certificate: Optional[float] = None
    history: Optional[List[float]] = None
    iterates: Optional[List[np.ndarray]] = None


def natural_residual(F, C, x, step):
    """``|x - P_C(x - step * F(x))|``, zero exactly at VI solutions."""
    v = as_vector(x, C.dim, "x")
    return float(np.linalg.norm(v - C.project(v - step * np.asarray(F(v), dtype=float))))


def _sampled_lipschitz(F, C):
    """Crude max difference quotient over seeded sample pairs, or None."""
    try:
        rng = np.random.default_rng(_LIPSCHITZ_PROBE_SEED)
        xs = C.sample(rng, _LIPSCHITZ_PROBE_PAIRS)
        ys = C.sample(rng, _LIPSCHITZ_PROBE_PAIRS)
    except Exception:
        return None
    best = 0.0
    for x, y in zip(xs, ys):
        dx = float(np.linalg.norm(x - y))
        if dx < 1e-12:
            continue
        q = float(np.linalg.norm(np.asarray(F(x), float) - F(y))) / dx
        best = max(best, q)
    return best if best > 0 else None


def _resolve_step(F, C, params):
    """Initial step and whether backtracking protects it."""
    if params.step is not None:
        return params.step, params.step_rule == "backtracking"
    bound = F.lipschitz_bound() if isinstance(F, OperatorExpr) else None
    if bound is not None and bound > 0:
        return 0.9 / bound, params.step_rule == "backtracking"
    est = _sampled_lipschitz(F, C)
    if est is None:
        return 1.0, True
    # sampled estimates can undershoot, so keep the safety of backtracking
    return 0.9 / (1.2 * est), True


def solve_projection(F, C, params=None, x0=None, record_history=False, record_iterates=False):
    """Fixed-point iteration of the natural map.

    Reliable for strongly monotone Lipschitz operators with a small enough
    step; merely monotone problems (for example rotation fields) make the
    iteration circle without converging, which the report states honestly.
    """
    params = params if params is not None else SolverParams()
    x = C.project(np.zeros(C.dim) if x0 is None else as_vector(x0, C.dim, "x0"))
    step, backtrack = _resolve_step(F, C, params)
    history = [] if record_history else None
    iterates = [x.copy()] if record_iterates else None
    iterations = 0
    while True:
        fx = np.asarray(F(x), dtype=float)
        x_next = C.project(x - step * fx)
        residual = float(np.linalg.norm(x - x_next))
        if record_history:
            history.append(residual)
        if backtrack:
            trials = 0
            fn = np.asarray(F(x_next), dtype=float)
            while (
                step * float(np.linalg.norm(fx - fn)) > _NU * residual
                and residual > 0
                and trials < params.trial_cap
            ):
                step *= params.beta
                x_next = C.project(x - step * fx)
                residual = float(np.linalg.norm(x - x_next))
                fn = np.asarray(F(x_next), dtype=float)
                trials += 1
        if residual <= params.residual_tol or iterations >= params.max_iter:
            return SolveReport(
                solution=x,
                residual=natural_residual(F, C, x, step),
                iterations=iterations,
                converged=residual <= params.residual_tol,
                step_used=step,
                history=history,
                iterates=iterates,
            )
        x = x_next
        iterations += 1
        if record_iterates:
            iterates.append(x.copy())


def solve_extragradient(F, C, params=None, x0=None, record_history=False, record_iterates=False):
    """Extragradient iteration: predictor step, then corrected update.

    Converges for monotone Lipschitz F once ``step * L < 1``.  With
    ``step_rule='backtracking'`` the step shrinks until the sampled
    Lipschitz condition ``step * |F(x) - F(y)| <= 0.9 |x - y|`` holds, so
    no a priori constant is needed.
    """
    params = params if params is not None else SolverParams()
    x = C.project(np.zeros(C.dim) if x0 is None else as_vector(x0, C.dim, "x0"))
    step, backtrack = _resolve_step(F, C, params)
    history = [] if record_history else None
    iterates = [x.copy()] if record_iterates else None
    iterations = 0
    while True:
        fx = np.asarray(F(x), dtype=float)
        y = C.project(x - step * fx)
        residual = float(np.linalg.norm(x - y))
        if record_history:
            history.append(residual)
        if residual <= params.residual_tol or iterations >= params.max_iter:
            return SolveReport(
                solution=x,
                residual=natural_residual(F, C, x, step),
                iterations=iterations,
                converged=residual <= params.residual_tol,
                step_used=step,
                history=history,
                iterates=iterates,
            )
        fy = np.asarray(F(y), dtype=float)
        if backtrack:
            trials = 0
            while (
                step * float(np.linalg.norm(fx - fy)) > _NU * residual
                and residual > 0
                and trials < params.trial_cap
            ):
                step *= params.beta
                y = C.project(x - step * fx)
                residual = float(np.linalg.norm(x - y))
                fy = np.asarray(F(y), dtype=float)
                trials += 1
        x = C.project(x - step * fy)
        iterations += 1
        if record_iterates:
            iterates.append(x.copy())
