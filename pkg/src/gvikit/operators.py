"""Operator expressions and sampled hypothesis checks.

The expression tree covers the affine and mildly nonlinear operators the
solvers are exercised with.  Every node evaluates on a single vector or on
a batch whose last axis is the input dimension, which keeps the grid
oracle vectorized.

The ``check_*`` functions probe inequalities on randomized samples from a
compact set and return a ``PropertyReport``.  A sampled check can refute a
property (with a reproducible witness) but can only report that it held on
the samples; ``proven`` is reserved for the analytic affine test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, InversionFailed, UnsupportedVariant
from .geometry import as_vector, segment_distance

FD_STEP = 1e-6
FIBER_MATCH_TOL = 1e-7
PSD_TOL = 1e-9

# caps on how many samples get the expensive numerical-inversion treatment
_INVERT_CHECK_CAP = 25
_FIBER_PROBE_CAP = 64


class OperatorExpr:
    """A map from R^in_dim to R^out_dim, callable on vectors or batches."""

    in_dim: int
    out_dim: int

    def __call__(self, x):
        raise NotImplementedError

    def lipschitz_bound(self):
        """Exact global Lipschitz constant when one is derivable, else None."""
        return None

    def to_dict(self):
        raise NotImplementedError


class Identity(OperatorExpr):
    def __init__(self, dim):
        if int(dim) < 1:
            raise ValueError("dimension must be positive")
        self.in_dim = self.out_dim = int(dim)

    def __call__(self, x):
        return np.asarray(x, dtype=float)

    def lipschitz_bound(self):
        return 1.0

    def to_dict(self):
        return {"op": "identity", "dim": self.in_dim}


class Constant(OperatorExpr):
    def __init__(self, value, in_dim=None):
        self.value = as_vector(value, name="value")
        self.out_dim = self.value.shape[0]
        self.in_dim = self.out_dim if in_dim is None else int(in_dim)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.value, x.shape[:-1] + (self.out_dim,)).copy()

    def lipschitz_bound(self):
        return 0.0

    def to_dict(self):
        d = {"op": "constant", "value": self.value.tolist()}
        if self.in_dim != self.out_dim:
            d["in_dim"] = self.in_dim
        return d


class Affine(OperatorExpr):
    """x |-> matrix @ x + shift."""

    def __init__(self, matrix, shift=None):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        self.matrix = m
        self.out_dim, self.in_dim = m.shape
        self.shift = (
            np.zeros(self.out_dim) if shift is None else as_vector(shift, self.out_dim, "shift")
        )

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T + self.shift

    def lipschitz_bound(self):
        return float(np.linalg.norm(self.matrix, 2))

    def to_dict(self):
        return {"op": "affine", "matrix": self.matrix.tolist(), "shift": self.shift.tolist()}


class Rotation(OperatorExpr):
    """Planar rotation by ``angle`` in the coordinate plane ``plane``."""

    def __init__(self, angle, plane=(0, 1), dim=2):
        self.in_dim = self.out_dim = int(dim)
        i, j = int(plane[0]), int(plane[1])
        if i == j or not (0 <= i < dim and 0 <= j < dim):
            raise ValueError("plane must name two distinct coordinates below dim")
        self.angle = float(angle)
        self.plane = (i, j)

    def __call__(self, x):
        out = np.array(x, dtype=float, copy=True)
        i, j = self.plane
        c, s = math.cos(self.angle), math.sin(self.angle)
        xi = np.asarray(x, dtype=float)[..., i]
        xj = np.asarray(x, dtype=float)[..., j]
        out[..., i] = c * xi - s * xj
        out[..., j] = s * xi + c * xj
        return out

    def lipschitz_bound(self):
        return 1.0

    def to_dict(self):
        return {
            "op": "rotation",
            "angle": self.angle,
            "plane": list(self.plane),
            "dim": self.in_dim,
        }


def _stable_sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


_POINTWISE = {
    "cube": (lambda x: x**3, None),
    "tanh": (np.tanh, 1.0),
    "sigmoid": (_stable_sigmoid, 0.25),
    "square": (lambda x: x**2, None),
}


class PointwiseNonlinear(OperatorExpr):
    """A fixed scalar nonlinearity applied coordinatewise."""

    def __init__(self, kind, dim):
        if kind not in _POINTWISE:
            raise ValueError(f"unknown pointwise kind {kind!r}")
        self.kind = kind
        self.in_dim = self.out_dim = int(dim)

    def __call__(self, x):
        fn, _ = _POINTWISE[self.kind]
        return fn(np.asarray(x, dtype=float))

    def lipschitz_bound(self):
        return _POINTWISE[self.kind][1]

    def to_dict(self):
        return {"op": "pointwise", "kind": self.kind, "dim": self.in_dim}


class Scale(OperatorExpr):
    def __init__(self, factor, inner):
        self.factor = float(factor)
        self.inner = inner
        self.in_dim = inner.in_dim
        self.out_dim = inner.out_dim

    def __call__(self, x):
        return self.factor * self.inner(x)

    def lipschitz_bound(self):
        l = self.inner.lipschitz_bound()
        return None if l is None else abs(self.factor) * l

    def to_dict(self):
        return {"op": "scale", "factor": self.factor, "inner": self.inner.to_dict()}


class _Binary(OperatorExpr):
    _tag = ""
    _sign = 1.0

    def __init__(self, left, right):
        if left.in_dim != right.in_dim or left.out_dim != right.out_dim:
            raise DimensionMismatch("operands must share input and output dimensions")
        self.left = left
        self.right = right
        self.in_dim = left.in_dim
        self.out_dim = left.out_dim

    def __call__(self, x):
        return self.left(x) + self._sign * self.right(x)

    def lipschitz_bound(self):
        a, b = self.left.lipschitz_bound(), self.right.lipschitz_bound()
        return None if a is None or b is None else a + b

    def to_dict(self):
        return {"op": self._tag, "left": self.left.to_dict(), "right": self.right.to_dict()}


class Sum(_Binary):
    _tag = "sum"
    _sign = 1.0


class Difference(_Binary):
    """left - right; ``Difference(g, f)`` is the coincidence operator."""

    _tag = "difference"
    _sign = -1.0


class Compose(OperatorExpr):
    """outer after inner."""

    def __init__(self, outer, inner):
        if outer.in_dim != inner.out_dim:
            raise DimensionMismatch("outer input dimension must match inner output")
        self.outer = outer
        self.inner = inner
        self.in_dim = inner.in_dim
        self.out_dim = outer.out_dim

    def __call__(self, x):
        return self.outer(self.inner(x))

    def lipschitz_bound(self):
        a, b = self.outer.lipschitz_bound(), self.inner.lipschitz_bound()
        return None if a is None or b is None else a * b

    def to_dict(self):
        return {"op": "compose", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


def operator_from_dict(d):
    """Inverse of ``OperatorExpr.to_dict``."""
    tag = d.get("op")
    if tag == "identity":
        return Identity(d["dim"])
    if tag == "constant":
        return Constant(d["value"], d.get("in_dim"))
    if tag == "affine":
        return Affine(d["matrix"], d.get("shift"))
    if tag == "rotation":
        return Rotation(d["angle"], tuple(d.get("plane", (0, 1))), d.get("dim", 2))
    if tag == "pointwise":
        return PointwiseNonlinear(d["kind"], d["dim"])
    if tag == "scale":
        return Scale(d["factor"], operator_from_dict(d["inner"]))
    if tag == "sum":
        return Sum(operator_from_dict(d["left"]), operator_from_dict(d["right"]))
    if tag == "difference":
        return Difference(operator_from_dict(d["left"]), operator_from_dict(d["right"]))
    if tag == "compose":
        return Compose(operator_from_dict(d["outer"]), operator_from_dict(d["inner"]))
    raise UnsupportedVariant(f"unknown operator tag {tag!r}")


def evaluate(op, x):
    """Evaluate ``op`` at a single validated vector."""
    v = as_vector(x, getattr(op, "in_dim", None), "x")
    return np.asarray(op(v), dtype=float)


def jacobian_fd(op, x, h=FD_STEP):
    """Central finite-difference Jacobian of ``op`` at ``x``."""
    v = as_vector(x, getattr(op, "in_dim", None), "x")
    n = v.shape[0]
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        cols.append((np.asarray(op(v + e), float) - np.asarray(op(v - e), float)) / (2 * h))
    return np.array(cols).T


@dataclass(frozen=True)
class SampleConfig:
    """Randomized-check configuration; the seed is always explicit."""

    seed: int
    samples: int = 2000
    tol: float = 1e-9

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")


@dataclass
class PropertyReport:
    """Outcome of one property check.

    ``max_violation`` is the largest value of the check's violation
    functional over the samples; the property fails when it exceeds the
    tolerance, so a ``violated`` report always reproduces
    ``max_violation > tol`` at its witness.
    """

    property: str
    verdict: str  # "holds_on_samples" | "violated" | "proven"
    witness: Optional[tuple]
    samples_used: int
    max_violation: float

    def to_dict(self):
        w = None
        if self.witness is not None:
            w = [np.asarray(v, dtype=float).tolist() for v in self.witness]
        return {
            "property": self.property,
            "verdict": self.verdict,
            "witness": w,
            "samples_used": self.samples_used,
            "max_violation": self.max_violation,
        }


def _scan_pairs(name, K, cfg, violation):
    """Shared driver: track the worst violation over sampled pairs."""
    rng = np.random.default_rng(cfg.seed)
    worst = -math.inf
    worst_pair = None
    for _ in range(cfg.samples):
        x = K.sample(rng)
        y = K.sample(rng)
        v = violation(x, y)
        if v > worst:
            worst = v
            worst_pair = (x, y)
    if worst > cfg.tol:
        return PropertyReport(name, "violated", worst_pair, cfg.samples, worst)
    return PropertyReport(name, "holds_on_samples", None, cfg.samples, worst)


def check_monotone_relative(T, t, K, cfg):
    """Sampled test of ``<T(x) - T(y), t(x) - t(y)> >= 0`` on K.

    With ``t`` the identity this is plain monotonicity.  The violation
    functional is the negated inner product.
    """

    def viol(x, y):
        return -float(np.dot(np.asarray(T(x)) - T(y), np.asarray(t(x)) - t(y)))

    return _scan_pairs("monotone_relative", K, cfg, viol)


def affine_relative_monotone(matrix, relative_matrix, psd_tol=PSD_TOL):
    """Analytic relative-monotonicity test for the affine pair (M, G).

    ``x -> Mx + q`` is monotone relative to ``x -> Gx + h`` exactly when
    the symmetric part of ``M^T G`` is positive semidefinite, so an
    eigenvalue decomposition decides the property outright.
    """
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    g = np.atleast_2d(np.asarray(relative_matrix, dtype=float))
    if m.shape != g.shape or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("both matrices must be square with equal shapes")
    sym = 0.5 * (m.T @ g + g.T @ m)
    w, vecs = np.linalg.eigh(sym)
    lmin = float(w[0])
    if lmin >= -psd_tol:
        return PropertyReport("affine_relative_monotone", "proven", None, 0, -lmin)
    d = vecs[:, 0]
    return PropertyReport(
        "affine_relative_monotone", "violated", (d, np.zeros(m.shape[0])), 0, -lmin
    )


def check_ql(g, K, cfg):
    """Sampled quasilinearity diagnostic for ``g`` on convex K.

    Draws x, y and a point z on the segment between them and measures how
    far ``g(z)`` falls from the segment ``[g(x), g(y)]``.  Violations are
    expected for most nonlinear maps; this check is informational and the
    solvers do not require the property.
    """
    rng = np.random.default_rng(cfg.seed)
    worst = -math.inf
    worst_triple = None
    for _ in range(cfg.samples):
        x = K.sample(rng)
        y = K.sample(rng)
        z = x + rng.random() * (y - x)
        d = segment_distance(np.asarray(g(z), float), np.asarray(g(x), float), np.asarray(g(y), float))
        if d > worst:
            worst = d
            worst_triple = (x, y, z)
    if worst > cfg.tol:
        return PropertyReport("ql", "violated", worst_triple, cfg.samples, worst)
    return PropertyReport("ql", "holds_on_samples", None, cfg.samples, worst)


def check_g_nonexpansive(f, g, K, cfg):
    """Sampled test of ``|f(x) - f(y)| <= |g(x) - g(y)|`` on K."""

    def viol(x, y):
        df = float(np.linalg.norm(np.asarray(f(x), float) - f(y)))
        dg = float(np.linalg.norm(np.asarray(g(x), float) - g(y)))
        return df - dg

    return _scan_pairs("g_nonexpansive", K, cfg, viol)


def check_g_pseudocontractive(f, g, K, cfg):
    """Sampled test of ``<f(x) - f(y), g(x) - g(y)> <= |g(x) - g(y)|^2``.

    Equivalent to ``g - f`` being monotone relative to ``g``, which is the
    inequality the coincidence solver leans on; with ``g`` the identity it
    is the classical pseudocontractivity of ``f``.
    """

    def viol(x, y):
        df = np.asarray(f(x), float) - f(y)
        dg = np.asarray(g(x), float) - g(y)
        return float(np.dot(df, dg) - np.dot(dg, dg))

    return _scan_pairs("g_pseudocontractive", K, cfg, viol)


def check_range_inclusion(f, g, K, gK, cfg, inversion=None):
    """Sampled test that ``f`` maps K into the declared image of ``g``.

    Every sampled ``f(x)`` must lie in ``gK`` up to ``cfg.tol``; for a
    capped prefix of the samples the check also inverts ``g`` at ``f(x)``
    to confirm the point is reachable, since the declared image can
    overestimate the true range.
    """
    from .gvi import InversionParams, select_preimage

    inv = inversion if inversion is not None else InversionParams()
    rng = np.random.default_rng(cfg.seed)
    worst = -math.inf
    worst_witness = None
    for i in range(cfg.samples):
        x = K.sample(rng)
        fx = np.asarray(f(x), dtype=float)
        v = gK.distance(fx)
        if i < _INVERT_CHECK_CAP:
            try:
                select_preimage(g, K, fx, inv)
            except InversionFailed as err:
                v = max(v, float(err.best_residual or math.inf))
        if v > worst:
            worst = v
            worst_witness = (x,)
    if worst > cfg.tol:
        return PropertyReport("range_inclusion", "violated", worst_witness, cfg.samples, worst)
    return PropertyReport("range_inclusion", "holds_on_samples", None, cfg.samples, worst)


def check_fiber_condition(A, a, K, cfg, inversion=None, match_tol=FIBER_MATCH_TOL):
    """Sampled test that points with equal ``a``-values share ``A``-values.

    For each probe x the check inverts ``a`` at ``a(x)`` from several
    starts; every recovered preimage y with ``|a(x) - a(y)| <= match_tol``
    must satisfy ``|A(x) - A(y)| <= cfg.tol``.  This is the condition that
    makes the reduced operator independent of the preimage selection.
    """
    from .gvi import InversionParams, preimage_candidates

    inv = inversion if inversion is not None else InversionParams()
    rng = np.random.default_rng(cfg.seed)
    n_probe = min(cfg.samples, _FIBER_PROBE_CAP)
    worst = -math.inf
    worst_pair = None
    for _ in range(n_probe):
        x = K.sample(rng)
        ax = np.asarray(a(x), dtype=float)
        Ax = np.asarray(A(x), dtype=float)
        group = [x] + preimage_candidates(a, K, ax, inv)
        for y in group[1:]:
            if np.linalg.norm(np.asarray(a(y), float) - ax) > match_tol:
                continue
            v = float(np.linalg.norm(Ax - np.asarray(A(y), float)))
            if v > worst:
                worst = v
                worst_pair = (x, y)
    if worst == -math.inf:
        worst = 0.0
    if worst > cfg.tol:
        return PropertyReport("fiber_condition", "violated", worst_pair, n_probe, worst)
    return PropertyReport("fiber_condition", "holds_on_samples", None, n_probe, worst)
