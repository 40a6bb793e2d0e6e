"""SCARGC with a 1-nearest-neighbour classifier."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clustering import kmeans


@dataclass(frozen=True)
class ScargcState:
    k: int
    pool_size: int
    centroids: np.ndarray  # (k, d) past centroids
    centroid_labels: np.ndarray
    reference_X: np.ndarray
    reference_y: np.ndarray
    pending: np.ndarray  # (m, d), m < pool_size
    seed: int = 0
    flushes: int = 0


def _majority(labels: np.ndarray) -> int:
    values, counts = np.unique(labels, return_counts=True)
    return values[int(counts.argmax())]


def nearest_neighbor(reference: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Index of the closest reference row per query row; ties -> lowest index."""
    d2 = (
        (X * X).sum(axis=1)[:, None]
        - 2.0 * X @ reference.T
        + (reference * reference).sum(axis=1)[None, :]
    )
    return d2.argmin(axis=1)


def scargc_init(initial_X, initial_y, k: int, pool_size: int, seed: int = 0) -> ScargcState:
    X = np.asarray(initial_X, dtype=float)
    y = np.asarray(initial_y)
    if len(X) == 0 or len(X) != len(y):
        raise ValueError("initial labeled data must be non-empty with one label per instance")
    if pool_size < 1:
        raise ValueError("pool_size must be positive")
    classes = np.unique(y)
    if k < len(classes):
        raise ValueError(f"k={k} is smaller than the class count {len(classes)}")
    if k == len(classes):
        centroids = np.array([X[y == c].mean(axis=0) for c in classes])
        labels = classes.copy()
    else:
        model = kmeans(X, k, seed=seed)
        centroids = model.centroids
        labels = np.array([_majority(y[model.assignment == j]) for j in range(k)])
    return ScargcState(
        k, pool_size, centroids, labels, X.copy(), y.copy(), np.empty((0, X.shape[1])), seed
    )


def _flush(state: ScargcState, pool: np.ndarray) -> ScargcState:
    model = kmeans(pool, state.k, seed=state.seed + state.flushes + 1)
    nearest_past = nearest_neighbor(state.centroids, model.centroids)
    new_labels = state.centroid_labels[nearest_past]
    return replace(
        state,
        centroids=model.centroids,
        centroid_labels=new_labels,
        reference_X=pool,
        reference_y=new_labels[model.assignment],
        pending=np.empty((0, pool.shape[1])),
        flushes=state.flushes + 1,
    )


def scargc_step(state: ScargcState, batch) -> tuple[np.ndarray, ScargcState]:
    """Predict on arrival with the current 1-NN rule; re-cluster whenever the pool fills."""
    U = np.asarray(batch, dtype=float)
    if U.ndim != 2 or U.shape[1] != state.reference_X.shape[1]:
        raise ValueError("batch dimension does not match the initial data")
    preds = []
    start = 0
    while start < len(U):
        room = state.pool_size - len(state.pending)
        chunk = U[start : start + room]
        start += len(chunk)
        preds.append(state.reference_y[nearest_neighbor(state.reference_X, chunk)])
        pool = np.vstack([state.pending, chunk])
        if len(pool) == state.pool_size:
            state = _flush(state, pool)
        else:
            state = replace(state, pending=pool)
    return np.concatenate(preds) if preds else np.empty(0, dtype=state.reference_y.dtype), state
