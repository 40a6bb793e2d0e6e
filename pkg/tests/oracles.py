"""Brute-force reference computations used by the test suite.

Each oracle is written without touching the package internals so that a bug
in the implementation cannot leak into the expected value.
"""

from __future__ import annotations

import itertools

import numpy as np


def incircle_violations(vertices, triangles, rtol=1e-9):
    """Count (triangle, vertex) pairs where a vertex lies strictly inside a circumcircle.

    Uses the lifted 3x3 incircle determinant rather than circumcentres.
    """
    P = np.asarray(vertices, dtype=float)
    scale = max(1.0, float(np.abs(P).max()))
    bad = 0
    for a, b, c in triangles:
        pa, pb, pc = P[a], P[b], P[c]
        orient = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])
        for v in range(len(P)):
            if v in (a, b, c):
                continue
            rows = []
            for q in (pa, pb, pc):
                dx, dy = q - P[v]
                rows.append((dx, dy, dx * dx + dy * dy))
            det = np.linalg.det(np.array(rows))
            if np.sign(orient) * det > rtol * scale**4:
                bad += 1
    return bad


def triangle_area_sum(vertices, triangles) -> float:
    P = np.asarray(vertices, dtype=float)
    total = 0.0
    for a, b, c in triangles:
        total += 0.5 * abs(
            (P[b, 0] - P[a, 0]) * (P[c, 1] - P[a, 1]) - (P[b, 1] - P[a, 1]) * (P[c, 0] - P[a, 0])
        )
    return total


def best_two_partition_sse(X) -> float:
    """Optimal k=2 SSE by enumerating every split into two non-empty groups."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):
        side = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        sse = 0.0
        for part in (X[side], X[~side]):
            sse += float(((part - part.mean(axis=0)) ** 2).sum())
        best = min(best, sse)
    return best


def naive_mixture_density(weights, means, covs, x) -> float:
    x = np.asarray(x, dtype=float)
    d = len(x)
    total = 0.0
    for w, mu, S in zip(weights, means, covs):
        diff = x - mu
        norm = 1.0 / np.sqrt((2 * np.pi) ** d * np.linalg.det(S))
        total += w * norm * np.exp(-0.5 * diff @ np.linalg.solve(S, diff))
    return total


def connected_components(triangles) -> int:
    """Components of retained triangles, where sharing a vertex connects two triangles."""
    parent = {}

    def find(i):
        while parent.setdefault(i, i) != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for tri in triangles:
        for u, v in itertools.combinations(tri, 2):
            parent[find(u)] = find(v)
    return len({find(v) for tri in triangles for v in tri})
