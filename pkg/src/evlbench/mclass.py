"""MClassification: online classification with labeled micro-clusters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MicroCluster:
    n: int
    linear_sum: np.ndarray
    square_sum: np.ndarray
    label: int

    @classmethod
    def from_point(cls, x, label) -> "MicroCluster":
        x = np.asarray(x, dtype=float)
        return cls(1, x.copy(), x * x, label)

    @classmethod
    def from_points(cls, X, label) -> "MicroCluster":
        X = np.asarray(X, dtype=float)
        return cls(len(X), X.sum(axis=0), (X * X).sum(axis=0), label)

    def absorb(self, x) -> None:
        self.n += 1
        self.linear_sum = self.linear_sum + x
        self.square_sum = self.square_sum + x * x


def mc_centroid(mc: MicroCluster) -> np.ndarray:
    if mc.n < 1:
        raise ValueError("micro-cluster is empty")
    return mc.linear_sum / mc.n


def _radius(n, ls, ss) -> float:
    mean = ls / n
    dev = np.maximum(ss / n - mean * mean, 0.0)
    return float(np.sqrt(dev.sum()))


def mc_radius(mc: MicroCluster) -> float:
    """Euclidean norm of the per-coordinate standard deviations."""
    if mc.n < 1:
        raise ValueError("micro-cluster is empty")
    return _radius(mc.n, mc.linear_sum, mc.square_sum)


class MCState:
    """Micro-clusters plus a cached centroid matrix for the nearest-centroid scan."""

    def __init__(self, clusters, r: float):
        if not r > 0:
            raise ValueError("radius threshold r must be positive")
        self.clusters = list(clusters)
        self.r = float(r)
        d = len(self.clusters[0].linear_sum) if self.clusters else 0
        self._centroids = np.empty((max(16, 2 * len(self.clusters)), d))
        for i, mc in enumerate(self.clusters):
            self._centroids[i] = mc_centroid(mc)

    @property
    def centroids(self) -> np.ndarray:
        return self._centroids[: len(self.clusters)]

    def _append(self, mc: MicroCluster) -> None:
        m = len(self.clusters)
        if m == len(self._centroids):
            grown = np.empty((2 * m, self._centroids.shape[1]))
            grown[:m] = self._centroids
            self._centroids = grown
        self._centroids[m] = mc_centroid(mc)
        self.clusters.append(mc)


def mclass_init(initial_X, initial_y, r: float = 0.1) -> MCState:
    X = np.asarray(initial_X, dtype=float)
    if len(X) == 0:
        raise ValueError("initial labeled data is empty")
    return MCState([MicroCluster.from_point(x, y) for x, y in zip(X, initial_y)], r)


def mclass_step(state: MCState, x):
    """Classify one instance, then grow its nearest micro-cluster or start a new one.

    Updates ``state`` in place and returns ``(label, state)``.
    """
    x = np.asarray(x, dtype=float)
    diff = state.centroids - x
    nearest = int(np.einsum("ij,ij->i", diff, diff).argmin())
    mc = state.clusters[nearest]
    label = mc.label
    n, ls, ss = mc.n + 1, mc.linear_sum + x, mc.square_sum + x * x
    if _radius(n, ls, ss) > state.r:
        state._append(MicroCluster.from_point(x, label))
    else:
        mc.n, mc.linear_sum, mc.square_sum = n, ls, ss
        state._centroids[nearest] = ls / n
    return label, state


def mclass_predict_batch(state: MCState, batch) -> np.ndarray:
    """Run :func:`mclass_step` over the rows of ``batch`` in order."""
    out = []
    for x in np.asarray(batch, dtype=float):
        label, state = mclass_step(state, x)
        out.append(label)
    return np.array(out)
