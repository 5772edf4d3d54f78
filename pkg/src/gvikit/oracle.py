"""Brute-force grid oracle for low-dimensional certification.

Everything here works on an axis-aligned lattice clipped to the set, so
results are exact minima over the grid rather than over the set: a grid
gap is an upper bound on the true infimum, which makes it a refutation
tool.  Grids are generated in lexicographic order and ties resolve to the
first point, keeping every oracle answer deterministic.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionTooLarge, EmptyGrid
from .geometry import as_vector

ORACLE_MAX_DIM = 4
GRID_POINT_CAP = 10_000_000
_MEMBERSHIP_TOL = 1e-9


def grid_points(K, resolution):
    """Lattice of spacing ``resolution`` over K's bounding box, clipped to K.

    Vertices are appended when the set enumerates them, so sets whose
    interior misses the lattice (the simplex for most spacings) still
    produce a usable grid.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    if K.dim > ORACLE_MAX_DIM:
        raise DimensionTooLarge(f"oracle supports dimension <= {ORACLE_MAX_DIM}")
    lo, hi = K.bounding_box()
    axes = []
    count = 1
    for i in range(K.dim):
        n_i = int(np.floor((hi[i] - lo[i]) / resolution + 1e-12)) + 1
        axes.append(lo[i] + resolution * np.arange(n_i))
        count *= n_i
        if count > GRID_POINT_CAP:
            raise DimensionTooLarge(
                f"grid would exceed {GRID_POINT_CAP} points at resolution {resolution}"
            )
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, K.dim)
    keep = K._distance_batch(pts) <= _MEMBERSHIP_TOL
    pts = pts[keep]
    try:
        vs = np.asarray(K.vertices(), dtype=float)
    except Exception:
        vs = np.zeros((0, K.dim))
    extra = [
        v
        for v in vs
        if pts.size == 0 or np.min(np.linalg.norm(pts - v, axis=1)) > 1e-12
    ]
    if extra:
        pts = np.concatenate([pts, np.array(extra)], axis=0)
    if pts.shape[0] == 0:
        raise EmptyGrid(f"no grid point of spacing {resolution} lies inside the set")
    return pts


def brute_gap(A, a, K, x, resolution):
    """Grid minimum of ``<A(x), a(y) - a(x)>`` over y; upper-bounds the gap."""
    x = as_vector(x, K.dim, "x")
    pts = grid_points(K, resolution)
    ax = np.asarray(a(x), dtype=float)
    gx = np.asarray(A(x), dtype=float)
    vals = (np.asarray(a(pts), dtype=float) - ax) @ gx
    return float(np.min(vals))


def brute_vi_solve(A, a, K, resolution):
    """Grid point with the best (largest) grid gap, plus that gap.

    Quadratic in the grid size; rows are processed in chunks to keep the
    pairing matrix small.
    """
    pts = grid_points(K, resolution)
    avals = np.asarray(a(pts), dtype=float)
    gvals = np.asarray(A(pts), dtype=float)
    self_pair = np.einsum("nd,nd->n", gvals, avals)
    n = pts.shape[0]
    gaps = np.empty(n)
    chunk = max(1, min(n, 8_000_000 // max(n, 1)))
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        gaps[s:e] = (gvals[s:e] @ avals.T).min(axis=1) - self_pair[s:e]
    i = int(np.argmax(gaps))
    return pts[i].copy(), float(gaps[i])


def brute_coincidence(f, g, K, resolution):
    """Grid point minimizing ``|f(x) - g(x)|``, plus that residual."""
    pts = grid_points(K, resolution)
    r = np.linalg.norm(
        np.asarray(f(pts), dtype=float) - np.asarray(g(pts), dtype=float), axis=1
    )
    i = int(np.argmin(r))
    return pts[i].copy(), float(r[i])
