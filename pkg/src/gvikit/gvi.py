"""General variational inequalities solved through image-space reduction.

The problem: find x in K with ``<A(x), a(y) - a(x)> >= 0`` for all y in K.
Writing u = a(x) turns this into a Stampacchia inequality for the reduced
operator ``A o b`` on ``a(K)``, where b picks one preimage per image
point.  This module supplies the numerical preimage selection (projected
Gauss-Newton with deterministic multistart), the cached reduced operator,
the end-to-end solver, and the gap and complementarity certificates used
to audit its output.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InversionFailed
from .geometry import ConvexSet, PolyhedralCone, as_vector
from .operators import OperatorExpr, PropertyReport, jacobian_fd
from .vi import SolveReport, SolverParams, solve_extragradient

GAP_TOL = 1e-6
IMAGE_TOL = 1e-7
CACHE_TOL = 1e-9

_MULTISTART_SEED = 715225741
_IMAGE_CHECK_SEED = 398764591
_IMAGE_CHECK_SAMPLES = 64
_PROBE_SEED = 185136289
_PROBE_SAMPLES = 512


class ImageConsistencyWarning(UserWarning):
    """The declared image set missed a sampled value of the inner map."""


@dataclass
class InversionParams:
    """Controls for the projected Gauss-Newton preimage search."""

    tol: float = 1e-9
    max_iter: int = 60
    multistart: int = 8
    step_control: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.multistart < 1:
            raise ValueError("multistart must be positive")
        if not 0 < self.step_control <= 1:
            raise ValueError("step_control must lie in (0, 1]")


def _gauss_newton(a, K, u, x0, inv):
    """Minimize ``|a(x) - u|`` over K from one start; returns (x, residual)."""
    x = K.project(as_vector(x0, K.dim, "start"))
    r = np.asarray(a(x), dtype=float) - u
    best = float(np.linalg.norm(r))
    for _ in range(inv.max_iter):
        if best <= inv.tol:
            return x, best
        jac = jacobian_fd(a, x)
        d, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        if not np.all(np.isfinite(d)) or float(np.linalg.norm(d)) <= 1e-16 * (1 + best):
            break
        alpha = inv.step_control
        improved = False
        for _ in range(25):
            cand = K.project(x + alpha * d)
            rc = np.asarray(a(cand), dtype=float) - u
            nc = float(np.linalg.norm(rc))
            if nc < best:
                x, r, best = cand, rc, nc
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
    return x, best


def _default_starts(K, u, inv):
    starts = [K.project(u)] if u.shape[0] == K.dim else []
    extra = inv.multistart - len(starts)
    if extra > 0:
        rng = np.random.default_rng(_MULTISTART_SEED)
        pts = K.sample(rng, extra)
        starts.extend(np.asarray(pts))
    return starts


def select_preimage(a, K, u, inv=None, starts=None):
    """One point x in K with ``|a(x) - u|`` within tolerance.

    Starts are tried in order and the first success wins, which makes the
    selection deterministic; the default start list is the projection of
    ``u`` onto K followed by a fixed-seed sample of K.  Raises
    ``InversionFailed`` with the best residual seen when no start reaches
    the tolerance.
    """
    inv = inv if inv is not None else InversionParams()
    u = as_vector(u, getattr(a, "out_dim", None), "u")
    if starts is None:
        starts = _default_starts(K, u, inv)
    best_x, best_res = None, np.inf
    for x0 in starts:
        x, res = _gauss_newton(a, K, u, x0, inv)
        if res <= inv.tol:
            return x
        if res < best_res:
            best_x, best_res = x, res
    raise InversionFailed(
        f"no preimage of {np.asarray(u).tolist()} within {inv.tol} "
        f"(best residual {best_res:.3e})",
        best_residual=best_res,
        best_point=best_x,
    )


def preimage_candidates(a, K, u, inv=None, dedup_tol=1e-6):
    """All distinct preimages the multistart search can reach.

    Used by the fiber and selection-independence checks, which need to see
    every branch of ``a^{-1}``, not just the first."""
    inv = inv if inv is not None else InversionParams()
    u = as_vector(u, getattr(a, "out_dim", None), "u")
    found = []
    for x0 in _default_starts(K, u, inv):
        x, res = _gauss_newton(a, K, u, x0, inv)
        if res <= inv.tol and all(np.linalg.norm(x - y) > dedup_tol for y in found):
            found.append(x)
    return found


class ReducedOperator:
    """``u -> A(b(u))`` with a per-instance fiber cache.

    Representatives are cached per image point (quantized at CACHE_TOL)
    and each new inversion warm-starts from the most recent representative
    so the selection does not hop between fibers while a solver walks the
    image set.  Instances are meant to live for a single solve.
    """

    def __init__(self, A, a, K, inversion=None):
        if A.in_dim != K.dim or a.in_dim != K.dim:
            raise DimensionMismatch("operator input dimensions must match the set")
        self.A = A
        self.a = a
        self.K = K
        self.inversion = inversion if inversion is not None else InversionParams()
        self.in_dim = a.out_dim
        self.out_dim = A.out_dim
        self._cache = {}
        self._last = None
        rng = np.random.default_rng(_MULTISTART_SEED)
        n_extra = max(self.inversion.multistart - 1, 0)
        self._starts = list(np.atleast_2d(K.sample(rng, n_extra))) if n_extra else []

    def lipschitz_bound(self):
        return None

    def _key(self, u):
        return tuple(np.round(u / CACHE_TOL).astype(np.int64))

    def representative(self, u):
        """The cached or freshly inverted preimage of ``u``."""
        u = np.asarray(u, dtype=float)
        key = self._key(u)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        starts = []
        if self._last is not None:
            starts.append(self._last)
        starts.append(self.K.project(u))
        starts.extend(self._starts)
        x = select_preimage(self.a, self.K, u, self.inversion, starts=starts)
        self._cache[key] = x
        self._last = x
        return x

    def __call__(self, u):
        return np.asarray(self.A(self.representative(u)), dtype=float)


@dataclass
class GviProblem:
    """Problem data for ``VI(A, a, K)`` plus the declared image of ``a``.

    ``image_aK`` must describe ``a(K)``; construction samples K and warns
    when a mapped point falls outside the declared image, since a wrong
    image silently changes the problem being solved.
    """

    A: OperatorExpr
    a: OperatorExpr
    K: ConvexSet
    image_aK: ConvexSet
    params: SolverParams = field(default_factory=SolverParams)
    inversion: InversionParams = field(default_factory=InversionParams)

    def __post_init__(self):
        if self.A.in_dim != self.K.dim or self.a.in_dim != self.K.dim:
            raise DimensionMismatch("operator input dimensions must match K")
        if self.image_aK.dim != self.a.out_dim:
            raise DimensionMismatch("image set dimension must match the range of a")
        try:
            rng = np.random.default_rng(_IMAGE_CHECK_SEED)
            pts = np.atleast_2d(self.K.sample(rng, _IMAGE_CHECK_SAMPLES))
        except Exception:
            return
        worst = 0.0
        witness = None
        for x in pts:
            d = self.image_aK.distance(np.asarray(self.a(x), dtype=float))
            if d > worst:
                worst = d
                witness = x
        if worst > IMAGE_TOL:
            warnings.warn(
                f"declared image misses a(x) by {worst:.3e} at x={witness.tolist()}",
                ImageConsistencyWarning,
                stacklevel=2,
            )


@dataclass
class GviSolveReport(SolveReport):
    reduced_solution: Optional[np.ndarray] = None
    pullback_residual: float = 0.0


def gvi_gap(problem, x, probes=None):
    """Best probed value of ``<A(x), a(y) - a(x)>``; solutions score ~0.

    The minimum runs over a finite probe set (vertices of K when they are
    enumerable, a fixed-seed sample of K, and x itself), so a markedly
    negative value refutes x while a near-zero value only certifies it
    against those probes.
    """
    x = as_vector(x, problem.K.dim, "x")
    if probes is None:
        probes = default_gap_probes(problem.K)
    probes = [as_vector(p, problem.K.dim, "probe") for p in probes] + [x]
    pmat = np.array(probes)
    ax = np.asarray(problem.a(x), dtype=float)
    gx = np.asarray(problem.A(x), dtype=float)
    vals = (np.asarray(problem.a(pmat), dtype=float) - ax) @ gx
    return float(np.min(vals))


def default_gap_probes(K, n_samples=_PROBE_SAMPLES, seed=_PROBE_SEED):
    probes = []
    try:
        probes.extend(np.asarray(K.vertices()))
    except Exception:
        pass
    rng = np.random.default_rng(seed)
    try:
        probes.extend(np.atleast_2d(K.sample(rng, n_samples)))
    except Exception:
        pass
    return probes


def solve_gvi(problem, x0=None, record_history=False):
    """Reduce to the image set, solve there, and pull the solution back.

    The reduced inequality is solved with the extragradient method; the
    reported solution is the cached fiber representative of the reduced
    solution, so ``a(x) = u`` holds up to the inversion tolerance, and the
    gap certificate is evaluated on the original problem.
    """
    reduced = ReducedOperator(problem.A, problem.a, problem.K, problem.inversion)
    rep = solve_extragradient(
        reduced,
        problem.image_aK,
        problem.params,
        x0=x0,
        record_history=record_history,
    )
    u_star = rep.solution
    x_star = reduced.representative(u_star)
    pullback = float(np.linalg.norm(np.asarray(problem.a(x_star), dtype=float) - u_star))
    gap = gvi_gap(problem, x_star)
    return GviSolveReport(
        solution=x_star,
        residual=rep.residual,
        iterations=rep.iterations,
        converged=rep.converged,
        step_used=rep.step_used,
        gap_certificate=gap,
        history=rep.history,
        reduced_solution=u_star,
        pullback_residual=pullback,
    )


@dataclass
class ComplementarityReport:
    value_in_cone: bool
    operator_in_polar: bool
    orthogonal: bool
    slacks: dict

    @property
    def ok(self):
        return self.value_in_cone and self.operator_in_polar and self.orthogonal

    def to_dict(self):
        return {
            "value_in_cone": self.value_in_cone,
            "operator_in_polar": self.operator_in_polar,
            "orthogonal": self.orthogonal,
            "ok": self.ok,
            "slacks": dict(self.slacks),
        }


def complementarity_check(T, g, cone, u, tol=1e-8):
    """Generalized complementarity predicate at the point ``u``.

    Checks ``g(u)`` in the cone, ``T(u)`` in the polar cone (nonnegative
    pairing with every generator), and ``<T(u), g(u)> = 0``, each up to
    ``tol``, reporting the three slacks so near-misses are visible.
    """
    if not isinstance(cone, PolyhedralCone):
        raise DimensionMismatch("complementarity requires a PolyhedralCone")
    u = as_vector(u, getattr(T, "in_dim", None), "u")
    gu = np.asarray(g(u), dtype=float)
    tu = np.asarray(T(u), dtype=float)
    membership = float(cone.distance(gu))
    pairings = tu @ cone.generators
    polar = float(max(0.0, -float(np.min(pairings))))
    orth = float(abs(float(tu @ gu)))
    return ComplementarityReport(
        value_in_cone=membership <= tol,
        operator_in_polar=polar <= tol,
        orthogonal=orth <= tol,
        slacks={"membership": membership, "polar": polar, "orthogonality": orth},
    )


def check_selection_independence(problem, x, inversion=None, tol=1e-6):
    """Verify the solved point does not depend on the preimage branch.

    Every alternative preimage y of ``a(x)`` reachable by the multistart
    search must carry the same operator value and must itself pass the gap
    probe, otherwise the report carries (x, y) as a witness.
    """
    inv = inversion if inversion is not None else problem.inversion
    x = as_vector(x, problem.K.dim, "x")
    u = np.asarray(problem.a(x), dtype=float)
    ax_val = np.asarray(problem.A(x), dtype=float)
    candidates = preimage_candidates(problem.a, problem.K, u, inv)
    checked = 0
    worst = 0.0
    witness = None
    for y in candidates:
        if np.linalg.norm(y - x) <= tol:
            continue
        checked += 1
        v = float(np.linalg.norm(np.asarray(problem.A(y), dtype=float) - ax_val))
        gap = gvi_gap(problem, y)
        if gap < -GAP_TOL:
            v = max(v, -gap)
        if v > worst:
            worst = v
            witness = (x, y)
    if worst > tol:
        return PropertyReport("selection_independence", "violated", witness, checked, worst)
    return PropertyReport("selection_independence", "holds_on_samples", None, checked, worst)
