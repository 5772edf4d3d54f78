"""Convex sets with exact or iterative Euclidean projections.

Five set variants are provided: axis-aligned boxes, Euclidean balls, the
standard (probability) simplex, bounded halfspace intersections, and
finitely generated cones.  Boxes, balls, and simplices project in closed
form.  Halfspace intersections and cones project with Dykstra's
alternating-projection scheme, which converges to the exact projection for
intersections of halfspaces.

All sets are immutable value objects and all operations are pure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    EmptySet,
    NonConvergence,
    UnboundedSet,
    UnsupportedVariant,
)

PROJ_TOL = 1e-10
PROJ_MAX_ITER = 100_000
VERTEX_ENUM_MAX_DIM = 6
VERTEX_DEDUP_TOL = 1e-9
CONTAINS_TOL = 1e-9

# Facet enumeration walks over point subsets; cap the combinatorial budget.
_HULL_SUBSET_CAP = 200_000


def as_vector(x, dim=None, name="vector"):
    """Coerce ``x`` to a finite 1-D float array, validating its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _dedup_rows(rows, tol):
    """Keep the first representative of every tol-cluster, in input order."""
    kept = []
    for r in rows:
        if all(np.linalg.norm(r - k) > tol for k in kept):
            kept.append(r)
    return kept


def _null_space(a, rcond=1e-10):
    """Orthonormal basis of the null space of ``a`` (rows may be empty)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[1]
    if a.size == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rcond * max(smax, 1.0)))
    return vt[rank:].T


def _polish_active_set(normals, offsets, x0, active, feas_tol):
    """Exact projection from a guessed active set, or None.

    Solves the equality-constrained projection onto the guessed facets and
    prunes negative multipliers.  A returned point satisfies the full
    optimality system (feasible, ``x0 - z`` a nonnegative combination of
    active normals, equality on those facets), which certifies it as the
    Euclidean projection regardless of how the guess was produced.
    """
    idx = list(active)
    for _ in range(len(idx) + 1):
        if idx:
            sub = normals[idx]
            mu = np.linalg.lstsq(sub @ sub.T, sub @ x0 - offsets[idx], rcond=None)[0]
            z = x0 - sub.T @ mu
            if mu.size and float(np.min(mu)) < -1e-12:
                idx.pop(int(np.argmin(mu)))
                continue
        else:
            z = x0.copy()
        if float(np.max(normals @ z - offsets)) <= feas_tol:
            return z
        return None
    return None


def _dykstra_halfspaces(normals, offsets, point, tol, max_iter):
    """Project ``point`` onto the intersection of unit-normal halfspaces.

    Dykstra's corrections make the limit the exact Euclidean projection,
    not merely a feasible point.  The iterate can park on a spurious face
    for a whole cycle (zero displacement) while corrections keep draining,
    so feasibility plus stalled movement alone is not a safe stop: the
    implied multipliers must also satisfy complementarity.  An accepted
    iterate is then polished by an exact active-set solve.
    """
    x = np.array(point, dtype=float)
    slack = normals @ x - offsets
    if slack.size == 0 or np.max(slack) <= 0.0:
        return x
    x0 = x.copy()
    m = normals.shape[0]
    corr = np.zeros((m, x.shape[0]))
    scale = 1.0 + float(np.linalg.norm(x0))
    feas_tol = tol * 1e-2
    move_tol = tol * 1e-3 * scale
    comp_tol = tol * 1e-2 * scale**2
    prev = x.copy()
    for _ in range(max_iter):
        for i in range(m):
            y = x + corr[i]
            v = normals[i] @ y - offsets[i]
            if v > 0.0:
                x = y - v * normals[i]
                corr[i] = y - x
            else:
                x = y
                corr[i] = 0.0
        slack = normals @ x - offsets
        if (
            np.max(slack) <= feas_tol
            and np.linalg.norm(x - prev) <= move_tol
        ):
            # corr[i] = mu_i * n_i with mu_i >= 0, and x0 - x = sum corr,
            # so complementarity is the one optimality condition left open
            mu = np.einsum("ij,ij->i", corr, normals)
            if float(np.max(mu * np.maximum(-slack, 0.0), initial=0.0)) <= comp_tol:
                active = np.nonzero(slack >= -1e-7 * scale)[0]
                z = _polish_active_set(normals, offsets, x0, active, feas_tol)
                return z if z is not None else x
        prev = x.copy()
    raise NonConvergence(
        f"Dykstra projection did not reach tolerance {tol} in {max_iter} cycles"
    )


class ConvexSet:
    """Common interface for the set variants."""

    dim: int

    def project(self, point):
        raise NotImplementedError

    def distance(self, point):
        p = as_vector(point, self.dim, "point")
        return float(np.linalg.norm(p - self.project(p)))

    def contains(self, point, tol=CONTAINS_TOL):
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        return self.distance(point) <= tol

    def vertices(self):
        raise UnsupportedVariant(f"{type(self).__name__} does not enumerate vertices")

    def sample(self, rng, n=None):
        raise UnsupportedVariant(f"{type(self).__name__} does not support sampling")

    def bounding_box(self):
        raise UnsupportedVariant(f"{type(self).__name__} has no bounding box")

    def to_dict(self):
        raise NotImplementedError

    # Vectorized distances for grid filtering; rows of ``pts`` are points.
    def _distance_batch(self, pts):
        return np.array([self.distance(p) for p in pts])


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """Axis-aligned box ``{x : lower <= x <= upper}``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower, name="lower")
        hi = as_vector(self.upper, dim=lo.shape[0], name="upper")
        if np.any(lo > hi):
            raise ValueError("box needs lower <= upper in every coordinate")
        object.__setattr__(self, "lower", _readonly(lo))
        object.__setattr__(self, "upper", _readonly(hi))

    @property
    def dim(self):
        return self.lower.shape[0]

    def project(self, point):
        p = as_vector(point, self.dim, "point")
        return np.clip(p, self.lower, self.upper)

    def vertices(self):
        if self.dim > VERTEX_ENUM_MAX_DIM:
            raise DimensionTooLarge(
                f"vertex enumeration supports dimension <= {VERTEX_ENUM_MAX_DIM}"
            )
        corners = itertools.product(*zip(self.lower, self.upper))
        vs = _dedup_rows([np.array(c) for c in corners], VERTEX_DEDUP_TOL)
        return np.array(vs)

    def sample(self, rng, n=None):
        size = self.dim if n is None else (n, self.dim)
        return rng.uniform(self.lower, self.upper, size=size)

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()

    def _distance_batch(self, pts):
        return np.linalg.norm(pts - np.clip(pts, self.lower, self.upper), axis=1)

    def to_dict(self):
        return {"type": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    """Euclidean ball ``{x : |x - center| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_vector(self.center, name="center")
        r = float(self.radius)
        if not (r > 0 and math.isfinite(r)):
            raise ValueError("ball radius must be positive and finite")
        object.__setattr__(self, "center", _readonly(c))
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, point):
        p = as_vector(point, self.dim, "point")
        d = p - self.center
        nd = float(np.linalg.norm(d))
        if nd <= self.radius:
            return p.copy()
        return self.center + d * (self.radius / nd)

    def distance(self, point):
        p = as_vector(point, self.dim, "point")
        return max(0.0, float(np.linalg.norm(p - self.center)) - self.radius)

    def sample(self, rng, n=None):
        m = 1 if n is None else n
        z = rng.standard_normal((m, self.dim))
        z /= np.maximum(np.linalg.norm(z, axis=1, keepdims=True), 1e-300)
        radii = self.radius * rng.random(m) ** (1.0 / self.dim)
        pts = self.center + z * radii[:, None]
        return pts[0] if n is None else pts

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def _distance_batch(self, pts):
        return np.maximum(
            0.0, np.linalg.norm(pts - self.center, axis=1) - self.radius
        )

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


def _simplex_project_rows(y):
    """Row-wise projection onto the standard simplex (sum one, nonnegative).

    Sort-based algorithm: find the largest active-support size whose
    water-level shift keeps every kept coordinate positive.
    """
    u = -np.sort(-y, axis=1)
    css = np.cumsum(u, axis=1)
    j = np.arange(1, y.shape[1] + 1)
    cond = u + (1.0 - css) / j > 0.0
    rho = y.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = (css[np.arange(y.shape[0]), rho] - 1.0) / (rho + 1.0)
    return np.maximum(y - theta[:, None], 0.0)


@dataclass(frozen=True)
class Simplex(ConvexSet):
    """Standard simplex ``{x >= 0, sum(x) = 1}`` in R^dim."""

    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("simplex dimension must be at least 1")
        object.__setattr__(self, "dim", int(self.dim))

    def project(self, point):
        p = as_vector(point, self.dim, "point")
        return _simplex_project_rows(p[None, :])[0]

    def vertices(self):
        if self.dim > VERTEX_ENUM_MAX_DIM:
            raise DimensionTooLarge(
                f"vertex enumeration supports dimension <= {VERTEX_ENUM_MAX_DIM}"
            )
        return np.eye(self.dim)

    def sample(self, rng, n=None):
        size = None if n is None else n
        return rng.dirichlet(np.ones(self.dim), size=size)

    def bounding_box(self):
        return np.zeros(self.dim), np.ones(self.dim)

    def _distance_batch(self, pts):
        return np.linalg.norm(pts - _simplex_project_rows(pts), axis=1)

    def to_dict(self):
        return {"type": "simplex", "dim": self.dim}


def _enumerate_polytope_vertices(normals, offsets, dim):
    """All basic feasible intersection points of ``dim`` active rows."""
    m = normals.shape[0]
    verts = []
    for idx in itertools.combinations(range(m), dim):
        sub = normals[list(idx)]
        s = np.linalg.svd(sub, compute_uv=False)
        if s[-1] <= 1e-10 * max(s[0], 1.0):
            continue
        x = np.linalg.solve(sub, offsets[list(idx)])
        if np.max(normals @ x - offsets) <= 1e-9:
            verts.append(x)
    verts.sort(key=lambda v: tuple(v))
    return _dedup_rows(verts, VERTEX_DEDUP_TOL)


def _has_recession_ray(normals, dim):
    """True when ``{d : normals @ d <= 0}`` contains a nonzero direction.

    The lineality space catches contained lines; every extreme ray of a
    pointed recession cone is the null direction of some rank ``dim - 1``
    row subset, so enumerating those subsets is a complete test.
    """
    if _null_space(normals).shape[1] > 0:
        return True
    m = normals.shape[0]
    for idx in itertools.combinations(range(m), dim - 1):
        ns = _null_space(normals[list(idx)])
        if ns.shape[1] != 1:
            continue
        d = ns[:, 0]
        for cand in (d, -d):
            if np.max(normals @ cand) <= 1e-9:
                return True
    return False


@dataclass(frozen=True, eq=False)
class HPolytope(ConvexSet):
    """Bounded intersection of halfspaces ``{x : normals @ x <= offsets}``.

    The constructor enumerates vertices to certify that the intersection
    is nonempty and bounded; dimensions above VERTEX_ENUM_MAX_DIM are
    rejected because that certificate would be unaffordable.
    """

    normals: np.ndarray
    offsets: np.ndarray
    _unit_normals: np.ndarray = field(init=False, repr=False, compare=False)
    _unit_offsets: np.ndarray = field(init=False, repr=False, compare=False)
    _vertices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = as_vector(self.offsets, name="offsets")
        if a.ndim != 2 or a.shape[0] != b.shape[0]:
            raise DimensionMismatch("normals and offsets row counts differ")
        if not np.all(np.isfinite(a)):
            raise ValueError("normals have non-finite entries")
        dim = a.shape[1]
        if dim > VERTEX_ENUM_MAX_DIM:
            raise DimensionTooLarge(
                f"halfspace sets support dimension <= {VERTEX_ENUM_MAX_DIM}, got {dim}"
            )
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms <= 0):
            raise ValueError("every halfspace needs a nonzero normal")
        un = a / norms[:, None]
        ub = b / norms
        if _has_recession_ray(un, dim):
            raise UnboundedSet("halfspace intersection is unbounded")
        verts = _enumerate_polytope_vertices(un, ub, dim)
        if not verts:
            raise EmptySet("halfspace intersection is empty")
        object.__setattr__(self, "normals", _readonly(a))
        object.__setattr__(self, "offsets", _readonly(b))
        object.__setattr__(self, "_unit_normals", _readonly(un))
        object.__setattr__(self, "_unit_offsets", _readonly(ub))
        object.__setattr__(self, "_vertices", _readonly(np.array(verts)))

    @property
    def dim(self):
        return self.normals.shape[1]

    def project(self, point, tol=PROJ_TOL, max_iter=PROJ_MAX_ITER):
        p = as_vector(point, self.dim, "point")
        return _dykstra_halfspaces(self._unit_normals, self._unit_offsets, p, tol, max_iter)

    def distance(self, point):
        p = as_vector(point, self.dim, "point")
        worst = float(np.max(self._unit_normals @ p - self._unit_offsets))
        if worst <= 0.0:
            return 0.0
        return float(np.linalg.norm(p - self.project(p)))

    def contains(self, point, tol=CONTAINS_TOL):
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        p = as_vector(point, self.dim, "point")
        worst = float(np.max(self._unit_normals @ p - self._unit_offsets))
        if worst <= 0.0:
            return True
        if worst > tol:
            # per-halfspace distance lower-bounds the set distance
            return False
        return float(np.linalg.norm(p - self.project(p))) <= tol

    def vertices(self):
        return self._vertices.copy()

    def sample(self, rng, n=None):
        lo, hi = self.bounding_box()
        m = 1 if n is None else n
        out = []
        for _ in range(2000):
            cand = rng.uniform(lo, hi, size=(max(4 * m, 64), self.dim))
            keep = self._distance_batch(cand) <= 0.0
            out.extend(cand[keep])
            if len(out) >= m:
                break
        if len(out) < m:
            raise NonConvergence(
                "rejection sampling failed; the set may have near-zero volume"
            )
        pts = np.array(out[:m])
        return pts[0] if n is None else pts

    def bounding_box(self):
        return self._vertices.min(axis=0), self._vertices.max(axis=0)

    def _distance_batch(self, pts):
        slack = pts @ self._unit_normals.T - self._unit_offsets
        worst = slack.max(axis=1)
        out = np.where(worst <= 0.0, 0.0, worst)
        # the slack is only a lower bound off the set; refine the few
        # borderline points with a true projection
        for i in np.nonzero((worst > 0.0) & (worst <= 10 * CONTAINS_TOL))[0]:
            out[i] = float(np.linalg.norm(pts[i] - self.project(pts[i])))
        return out

    def to_dict(self):
        return {
            "type": "hpolytope",
            "normals": self.normals.tolist(),
            "offsets": self.offsets.tolist(),
        }


def _cone_halfspaces(generators):
    """Halfspace description of ``cone(generators)``.

    Directions orthogonal to the span are pinned with paired inequalities;
    within the span, facets are enumerated from rank ``k - 1`` generator
    subsets.  If no facet survives, the cone fills its span.
    """
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    d, m = g.shape
    u, s, _ = np.linalg.svd(g)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > 1e-10 * max(smax, 1.0)))
    rows = []
    for j in range(rank, d):
        rows.append(u[:, j])
        rows.append(-u[:, j])
    basis = u[:, :rank]
    gp = basis.T @ g
    tol = 1e-10 * max(smax, 1.0)
    if rank == 1:
        signs = gp[0]
        if not (np.any(signs > tol) and np.any(signs < -tol)):
            sgn = 1.0 if np.any(signs > tol) else -1.0
            rows.append(-sgn * basis[:, 0])
    elif rank >= 2:
        facets = []
        for idx in itertools.combinations(range(m), rank - 1):
            ns = _null_space(gp[:, list(idx)].T)
            if ns.shape[1] != 1:
                continue
            n = ns[:, 0]
            vals = n @ gp
            if np.max(vals) <= tol:
                facets.append(basis @ n)
            elif np.min(vals) >= -tol:
                facets.append(-(basis @ n))
        rows.extend(_dedup_rows(facets, 1e-9))
    if not rows:
        # cone equal to the whole space
        return np.zeros((0, d)), np.zeros(0)
    a = np.array(rows)
    a /= np.linalg.norm(a, axis=1)[:, None]
    return a, np.zeros(a.shape[0])


@dataclass(frozen=True, eq=False)
class PolyhedralCone(ConvexSet):
    """Conic hull of finitely many generator directions.

    Not compact, so it only supports projection, membership, and the
    complementarity predicates; sampling and vertex enumeration are
    undefined for this variant.
    """

    generators: np.ndarray
    _hs_normals: np.ndarray = field(init=False, repr=False, compare=False)
    _hs_offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.generators, dtype=float))
        if g.ndim != 2 or g.shape[1] == 0:
            raise DimensionMismatch("generators must form a d x m matrix")
        if not np.all(np.isfinite(g)):
            raise ValueError("generators have non-finite entries")
        if np.any(np.linalg.norm(g, axis=0) <= 0):
            raise ValueError("every generator must be nonzero")
        a, b = _cone_halfspaces(g)
        object.__setattr__(self, "generators", _readonly(g))
        object.__setattr__(self, "_hs_normals", _readonly(a))
        object.__setattr__(self, "_hs_offsets", _readonly(b))

    @property
    def dim(self):
        return self.generators.shape[0]

    def project(self, point, tol=PROJ_TOL, max_iter=PROJ_MAX_ITER):
        p = as_vector(point, self.dim, "point")
        if self._hs_normals.shape[0] == 0:
            return p.copy()
        return _dykstra_halfspaces(self._hs_normals, self._hs_offsets, p, tol, max_iter)

    def to_dict(self):
        return {"type": "cone", "generators": self.generators.tolist()}


def project(s, point):
    """Euclidean projection of ``point`` onto ``s``."""
    return s.project(point)


def contains(s, point, tol=CONTAINS_TOL):
    """Membership up to Euclidean distance ``tol``."""
    return s.contains(point, tol)


def vertices(s):
    """Vertex array for variants that enumerate them."""
    return s.vertices()


def segment_distance(p, x, y):
    """Distance from ``p`` to the closed segment ``[x, y]``.

    The projection coefficient is clamped to ``[0, 1]``, so degenerate
    segments fall back to the point distance.
    """
    p = as_vector(p, name="p")
    x = as_vector(x, dim=p.shape[0], name="x")
    y = as_vector(y, dim=p.shape[0], name="y")
    d = y - x
    den = float(d @ d)
    if den == 0.0:
        return float(np.linalg.norm(p - x))
    t = min(1.0, max(0.0, float((p - x) @ d) / den))
    return float(np.linalg.norm(p - (x + t * d)))


def _hull_halfspaces(points):
    """Facet description of the convex hull of ``points``.

    Works in the affine hull: orthogonal directions are pinned with
    equality pairs, and facets are enumerated inside the hull coordinates.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    center = pts.mean(axis=0)
    q = pts - center
    _, s, vt = np.linalg.svd(q, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > 1e-10 * max(smax, 1.0)))
    rows = []
    offsets = []
    for j in range(rank, d):
        nrm = vt[j]
        rows.append(nrm)
        offsets.append(float(nrm @ center))
        rows.append(-nrm)
        offsets.append(-float(nrm @ center))
    if rank == 0:
        return np.array(rows), np.array(offsets)
    basis = vt[:rank].T
    coords = q @ basis
    scale = 1.0 + float(np.max(np.abs(coords)))
    side_tol = 1e-9 * scale
    if rank == 1:
        t = coords[:, 0]
        b0 = basis[:, 0]
        rows.append(b0)
        offsets.append(float(t.max()) + float(b0 @ center))
        rows.append(-b0)
        offsets.append(-float(t.min()) - float(b0 @ center))
    else:
        if math.comb(n, rank) > _HULL_SUBSET_CAP:
            raise DimensionTooLarge(
                f"hull facet enumeration over C({n},{rank}) subsets is too large"
            )
        facets = []
        for idx in itertools.combinations(range(n), rank):
            sub = coords[list(idx)]
            ns = _null_space(sub[1:] - sub[0])
            if ns.shape[1] != 1:
                continue
            nrm = ns[:, 0]
            c = float(nrm @ sub[0])
            vals = coords @ nrm - c
            if np.max(vals) <= side_tol:
                facets.append((nrm, c))
            elif np.min(vals) >= -side_tol:
                facets.append((-nrm, -c))
        seen = []
        for nrm, c in facets:
            key = np.concatenate([nrm, [c]])
            if any(np.linalg.norm(key - k) <= 1e-9 for k in seen):
                continue
            seen.append(key)
            rows.append(basis @ nrm)
            offsets.append(c + float((basis @ nrm) @ center))
    return np.array(rows), np.array(offsets)


def affine_image_polytope(s, matrix, shift=None):
    """Halfspace description of ``{matrix @ v + shift : v in s}``.

    Requires a vertex-enumerable ``s``; the image is the convex hull of
    the mapped vertices.
    """
    vs = s.vertices()
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    if m.shape[1] != s.dim:
        raise DimensionMismatch(f"matrix has {m.shape[1]} columns, set has dim {s.dim}")
    c = np.zeros(m.shape[0]) if shift is None else as_vector(shift, m.shape[0], "shift")
    if m.shape[0] > VERTEX_ENUM_MAX_DIM:
        raise DimensionTooLarge(
            f"image dimension {m.shape[0]} exceeds {VERTEX_ENUM_MAX_DIM}"
        )
    imgs = np.asarray(vs) @ m.T + c
    rows, offsets = _hull_halfspaces(imgs)
    return HPolytope(rows, offsets)


def set_from_dict(d):
    """Inverse of ``ConvexSet.to_dict``."""
    kind = d.get("type")
    if kind == "box":
        return Box(d["lower"], d["upper"])
    if kind == "ball":
        return Ball(d["center"], d["radius"])
    if kind == "simplex":
        return Simplex(d["dim"])
    if kind == "hpolytope":
        return HPolytope(d["normals"], d["offsets"])
    if kind == "cone":
        return PolyhedralCone(d["generators"])
    raise UnsupportedVariant(f"unknown set type {kind!r}")
