"""Planar Delaunay triangulation, alpha complexes and boundary peeling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

SUPER_SCALE = 1.0e3
INCIRCLE_RTOL = 1e-12


class DegenerateGeometryError(ValueError):
    """Fewer than three distinct points, or all of them collinear."""


@dataclass(frozen=True)
class Triangulation2D:
    vertices: np.ndarray  # (m, 2) distinct points, lexicographically sorted
    triangles: np.ndarray  # (T, 3) counter-clockwise vertex indices
    circumcenters: np.ndarray
    circumradii: np.ndarray
    point_index: np.ndarray  # input point -> vertex index

    def edges(self) -> np.ndarray:
        e = np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)


@dataclass(frozen=True)
class AlphaComplex:
    parent: Triangulation2D
    alpha: float
    retained_triangles: np.ndarray  # indices into parent.triangles
    boundary_vertices: np.ndarray  # sorted vertex indices


def _circumcircles(P: np.ndarray, tris: np.ndarray):
    a, b, c = P[tris[:, 0]], P[tris[:, 1]], P[tris[:, 2]]
    bx, by = (b - a).T
    cx, cy = (c - a).T
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return a + np.column_stack([ux, uy]), ux * ux + uy * uy


def _check_degenerate(P: np.ndarray) -> None:
    if len(P) < 3:
        raise DegenerateGeometryError(f"need at least 3 distinct points, got {len(P)}")
    rel = P - P[0]
    far = int((rel * rel).sum(axis=1).argmax())
    u = rel[far]
    cross = np.abs(u[0] * rel[:, 1] - u[1] * rel[:, 0])
    if cross.max() <= 1e-12 * float(u @ u):
        raise DegenerateGeometryError("all points are collinear")


def delaunay_2d(points) -> Triangulation2D:
    """Bowyer-Watson with a super-triangle; points inserted in lexicographic order."""
    X = np.asarray(points, dtype=float) + 0.0
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError("delaunay_2d expects an (n, 2) array")
    P, point_index = np.unique(X, axis=0, return_inverse=True)
    point_index = point_index.reshape(-1)
    _check_degenerate(P)
    n = len(P)

    lo, hi = P.min(axis=0), P.max(axis=0)
    mid = 0.5 * (lo + hi)
    scale = float((hi - lo).max())
    Q = np.empty((n + 3, 2))
    Q[:n] = (P - mid) / scale
    M = SUPER_SCALE
    Q[n:] = [[-2.0 * M, -M], [2.0 * M, -M], [0.0, 2.0 * M]]

    cap = 8 * n + 16
    tri = np.empty((cap, 3), dtype=np.int64)
    cen = np.empty((cap, 2))
    rad2 = np.empty(cap)
    alive = np.zeros(cap, dtype=bool)
    tri[0] = (n, n + 1, n + 2)
    cen[:1], rad2[:1] = _circumcircles(Q, tri[:1])
    alive[0] = True
    used = 1

    for i in range(n):
        p = Q[i]
        live = np.flatnonzero(alive[:used])
        dc = cen[live] - p
        inside = (dc * dc).sum(axis=1) < rad2[live] * (1.0 - INCIRCLE_RTOL)
        bad = live[inside]
        edge_count = {}
        for t in bad:
            a, b, c = tri[t]
            for e in ((a, b), (b, c), (c, a)):
                key = (e[1], e[0])
                if key in edge_count:
                    del edge_count[key]
                else:
                    edge_count[e] = True
        alive[bad] = False
        new = np.array([(a, b, i) for (a, b) in edge_count], dtype=np.int64)
        k = len(new)
        if used + k > cap:
            grow = max(cap, k)
            tri = np.vstack([tri, np.empty((grow, 3), dtype=np.int64)])
            cen = np.vstack([cen, np.empty((grow, 2))])
            rad2 = np.concatenate([rad2, np.empty(grow)])
            alive = np.concatenate([alive, np.zeros(grow, dtype=bool)])
            cap += grow
        tri[used : used + k] = new
        cen[used : used + k], rad2[used : used + k] = _circumcircles(Q, new)
        alive[used : used + k] = True
        used += k

    final = tri[:used][alive[:used]]
    final = final[(final < n).all(axis=1)]
    final = _fill_hull_pockets(P, final)
    centers, r2 = _circumcircles(P, final)
    return Triangulation2D(P, final, centers, np.sqrt(r2), point_index)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(P: np.ndarray) -> list[int]:
    """Counter-clockwise hull vertex indices (monotone chain; P is sorted)."""
    lower, upper = [], []
    for i in range(len(P)):
        while len(lower) >= 2 and _cross(P[lower[-2]], P[lower[-1]], P[i]) <= 0:
            lower.pop()
        lower.append(i)
    for i in reversed(range(len(P))):
        while len(upper) >= 2 and _cross(P[upper[-2]], P[upper[-1]], P[i]) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _fill_hull_pockets(P: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Add the triangles a finite super-triangle can leave out along the hull."""
    directed = {(a, b) for t in tris for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}
    nxt = {a: b for (a, b) in directed if (b, a) not in directed}
    hull = _convex_hull(P)
    added = []

    def fill(i, j, chain):
        if not chain:
            return
        best, best_cos = None, 2.0
        for v in chain:
            u, w = P[i] - P[v], P[j] - P[v]
            cos = float(u @ w) / math.sqrt(float(u @ u) * float(w @ w))
            if cos < best_cos:
                best, best_cos = v, cos
        area = _cross(P[i], P[j], P[best])
        if area > 0:
            added.append((i, j, best))
        elif area < 0:
            added.append((j, i, best))
        k = chain.index(best)
        fill(i, best, chain[:k])
        fill(best, j, chain[k + 1 :])

    for h, g in zip(hull, hull[1:] + hull[:1]):
        if nxt.get(h) == g:
            continue
        chain, v = [], nxt.get(h)
        while v is not None and v != g and len(chain) <= len(P):
            chain.append(v)
            v = nxt.get(v)
        if v == g:
            fill(h, g, chain)
    if not added:
        return tris
    return np.vstack([tris, np.array(added, dtype=np.int64)])


def alpha_complex(tri: Triangulation2D, alpha: float) -> AlphaComplex:
    """Keep triangles with circumradius <= alpha; report boundary vertices."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    keep = np.flatnonzero(tri.circumradii <= alpha)
    T = tri.triangles[keep]
    m = len(tri.vertices)
    if len(T) == 0:
        return AlphaComplex(tri, alpha, keep, np.arange(m))
    e = np.sort(np.vstack([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    on_boundary = np.zeros(m, dtype=bool)
    on_boundary[uniq[counts == 1].ravel()] = True
    covered = np.zeros(m, dtype=bool)
    covered[T.ravel()] = True
    on_boundary |= ~covered
    return AlphaComplex(tri, alpha, keep, np.flatnonzero(on_boundary))


def default_alpha(points) -> float:
    """Twice the mean nearest-neighbour distance."""
    X = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(X) < 2:
        return 1.0
    d, _ = cKDTree(X).query(X, k=2)
    mean_nn = float(d[:, 1].mean())
    return 2.0 * mean_nn if mean_nn > 0 else 1.0


def peel_compaction(points, alpha: float, cp: float) -> np.ndarray:
    """Indices of the points left after peeling alpha-shape boundary layers.

    Peeling stops once at most ``ceil(cp * n)`` points remain; the last layer
    is only partly removed (farthest from the survivors' centroid first) so
    the count lands on the target.  Degenerate geometry ends peeling early.
    """
    if not 0.0 < cp <= 1.0:
        raise ValueError("cp must lie in (0, 1]")
    X = np.asarray(points, dtype=float) + 0.0
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("peel_compaction expects a non-empty (n, 2) array")
    n = len(X)
    target = math.ceil(cp * n)
    uniq, inverse, mult = np.unique(X, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    alive = np.ones(len(uniq), dtype=bool)
    remaining = n
    while remaining > target:
        ids = np.flatnonzero(alive)
        try:
            tri = delaunay_2d(uniq[ids])
        except DegenerateGeometryError:
            break
        # uniq rows are already sorted and distinct, so vertex j is ids[j]
        boundary = ids[alpha_complex(tri, alpha).boundary_vertices]
        drop = int(mult[boundary].sum())
        if remaining - drop >= target:
            alive[boundary] = False
            remaining -= drop
            continue
        centroid = (uniq[ids] * mult[ids, None]).sum(axis=0) / remaining
        dist = ((uniq[boundary] - centroid) ** 2).sum(axis=1)
        for j in boundary[np.argsort(-dist, kind="stable")]:
            if remaining - mult[j] < target:
                continue
            alive[j] = False
            remaining -= mult[j]
        break
    return np.flatnonzero(alive[inverse])
