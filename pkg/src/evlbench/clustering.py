"""k-means, cluster-and-label, and Gaussian mixtures fit by EM."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

LOG_2PI = np.log(2.0 * np.pi)


def _as_points(points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("expected a non-empty (n, d) array of points")
    return X


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


@dataclass
class KMeansModel:
    centroids: np.ndarray
    assignment: np.ndarray
    sse: float
    sse_trace: list = field(default_factory=list)
    n_iter: int = 0


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            i = rng.integers(n)
        else:
            i = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            i = min(i, n - 1)
        centers.append(X[i])
        d2 = np.minimum(d2, ((X - X[i]) ** 2).sum(axis=1))
    return np.array(centers)


def _lloyd(X, centroids, max_iter, tol):
    k = len(centroids)
    labels = None
    trace = []
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(X, centroids)
        new_labels = d2.argmin(axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        new_centroids = centroids.copy()
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j]:
                new_centroids[j] = X[labels == j].mean(axis=0)
        empty = np.flatnonzero(counts == 0)
        if len(empty):
            # re-seed each empty cluster with the point worst served by its centroid
            labels = labels.copy()
            for j in empty:
                err = ((X - new_centroids[labels]) ** 2).sum(axis=1)
                err[counts[labels] <= 1] = -1.0
                far = int(err.argmax())
                counts[labels[far]] -= 1
                labels[far] = j
                counts[j] = 1
                new_centroids[j] = X[far]
            for j in range(k):
                new_centroids[j] = X[labels == j].mean(axis=0)
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        trace.append(float(((X - centroids[labels]) ** 2).sum()))
        if shift < tol:
            d2 = _sq_dists(X, centroids)
            if np.array_equal(d2.argmin(axis=1), labels):
                break
    sse = float(((X - centroids[labels]) ** 2).sum())
    return centroids, labels, sse, trace, it


def _hartigan(X, centroids, labels, trace):
    """Single-point transfers that strictly lower the SSE (Hartigan's rule).

    A transfer from cluster a to b pays off when
    n_b / (n_b + 1) * |x - c_b|^2 < n_a / (n_a - 1) * |x - c_a|^2.
    The result is also a Lloyd fixed point.
    """
    k = len(centroids)
    C = centroids.copy()
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k).astype(float)
    moved = True
    while moved:
        moved = False
        for i in range(len(X)):
            a = labels[i]
            if counts[a] <= 1:
                continue
            d = ((C - X[i]) ** 2).sum(axis=1)
            stay = counts[a] / (counts[a] - 1.0) * d[a]
            join = counts / (counts + 1.0) * d
            join[a] = np.inf
            b = int(join.argmin())
            if join[b] < stay * (1.0 - 1e-12):
                C[a] = (C[a] * counts[a] - X[i]) / (counts[a] - 1.0)
                C[b] = (C[b] * counts[b] + X[i]) / (counts[b] + 1.0)
                counts[a] -= 1.0
                counts[b] += 1.0
                labels[i] = b
                moved = True
        if moved:
            # recompute exactly to shed the drift of the incremental updates
            C = np.array([X[labels == j].mean(axis=0) for j in range(k)])
            trace.append(float(((X - C[labels]) ** 2).sum()))
    return C, labels


def kmeans(points, k: int, max_iter: int = 100, tol: float = 1e-10, seed: int = 0, n_init: int = 1,
           init=None, refine: bool = False) -> KMeansModel:
    """Lloyd's algorithm from k-means++ seeds; the best of ``n_init`` restarts wins.

    ``init`` optionally supplies starting centroids and disables restarts.
    ``refine`` follows each Lloyd run with Hartigan transfers, which escape
    many Lloyd fixed points at an O(n k) Python-level cost per sweep.
    """
    X = _as_points(points)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > len(X):
        raise ValueError(f"k={k} exceeds the number of points ({len(X)})")
    if init is not None:
        starts = [np.array(init, dtype=float, copy=True)]
        if starts[0].shape != (k, X.shape[1]):
            raise ValueError("init must have shape (k, d)")
    else:
        rng = np.random.default_rng(seed)
        starts = [_kmeans_pp(X, k, rng) for _ in range(max(1, n_init))]
    best = None
    for c0 in starts:
        res = _lloyd(X, c0.astype(float), max_iter, tol)
        if refine:
            C, labels, _, trace, it = res
            C, labels = _hartigan(X, C, labels, trace)
            res = (C, labels, float(((X - C[labels]) ** 2).sum()), trace, it)
        if best is None or res[2] < best[2]:
            best = res
    centroids, labels, sse, trace, it = best
    return KMeansModel(centroids, labels, sse, trace, it)


def cluster_and_label(labeled_points, labels, unlabeled_points, k: int, seed: int = 0,
                      n_init: int = 1) -> np.ndarray:
    """Cluster labeled and unlabeled points together and spread majority labels.

    Clusters without labeled members borrow the label of the nearest cluster
    that has some.  Majority ties go to the smallest label.
    """
    XL = _as_points(labeled_points)
    yL = np.asarray(labels)
    XU = _as_points(unlabeled_points)
    if len(XL) != len(yL):
        raise ValueError("labeled points and labels differ in length")
    if XL.shape[1] != XU.shape[1]:
        raise ValueError("labeled and unlabeled points differ in dimension")
    X = np.vstack([XL, XU])
    if k > len(X):
        raise ValueError(f"k={k} exceeds the union size ({len(X)})")
    model = kmeans(X, k, seed=seed, n_init=n_init)
    assign_l = model.assignment[: len(XL)]
    classes = np.unique(yL)
    cluster_label = np.empty(k, dtype=yL.dtype)
    has_label = np.zeros(k, dtype=bool)
    for j in range(k):
        members = yL[assign_l == j]
        if len(members):
            votes = np.array([(members == c).sum() for c in classes])
            cluster_label[j] = classes[int(votes.argmax())]
            has_label[j] = True
    donors = np.flatnonzero(has_label)
    for j in np.flatnonzero(~has_label):
        d2 = ((model.centroids[donors] - model.centroids[j]) ** 2).sum(axis=1)
        cluster_label[j] = cluster_label[donors[int(d2.argmin())]]
    return cluster_label[model.assignment[len(XL):]]


# -- Gaussian mixtures ------------------------------------------------------


@dataclass
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    loglik_trace: list = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dimension(self) -> int:
        return self.means.shape[1]


def _floor_cov(S: np.ndarray, floor: float) -> np.ndarray:
    S = 0.5 * (S + S.T)
    vals, vecs = np.linalg.eigh(S)
    if vals.min() >= floor:
        return S
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T


def _component_logpdf(X: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    n, d = X.shape
    out = np.empty((n, len(means)))
    for j, (mu, S) in enumerate(zip(means, covs)):
        L = np.linalg.cholesky(S)
        z = np.linalg.solve(L, (X - mu).T)
        logdet = 2.0 * np.log(np.diag(L)).sum()
        out[:, j] = -0.5 * (d * LOG_2PI + logdet + (z * z).sum(axis=0))
    return out


def gmm_fit(points, K: int, max_iter: int = 100, tol: float = 1e-6, cov_floor: float = 1e-6,
            seed: int = 0) -> GmmModel:
    """EM for a full-covariance mixture, started from k-means."""
    X = _as_points(points)
    n, d = X.shape
    if K < 1:
        raise ValueError("K must be at least 1")
    if K > n:
        raise ValueError(f"K={K} exceeds the number of points ({n})")
    km = kmeans(X, K, seed=seed)
    resp = np.zeros((n, K))
    resp[np.arange(n), km.assignment] = 1.0
    weights, means, covs = _m_step(X, resp, cov_floor)
    trace = []
    for _ in range(max_iter):
        logp = _component_logpdf(X, means, covs) + np.log(weights)
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        if trace and ll - trace[-1] < tol:
            trace.append(ll)
            break
        trace.append(ll)
        resp = np.exp(logp - norm[:, None])
        weights, means, covs = _m_step(X, resp, cov_floor)
    return GmmModel(weights, means, covs, trace)


def _m_step(X, resp, cov_floor):
    n, d = X.shape
    nk = resp.sum(axis=0) + 10.0 * np.finfo(float).tiny
    weights = nk / nk.sum()
    means = (resp.T @ X) / nk[:, None]
    covs = np.empty((len(nk), d, d))
    for j in range(len(nk)):
        diff = X - means[j]
        covs[j] = _floor_cov((resp[:, j, None] * diff).T @ diff / nk[j], cov_floor)
    return weights, means, covs


def gmm_logpdf(model: GmmModel, x) -> np.ndarray | float:
    """Mixture log-density at one point (scalar) or at each row of ``x``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != model.dimension:
        raise ValueError(f"expected dimension {model.dimension}, got shape {x.shape}")
    with np.errstate(divide="ignore"):
        logw = np.log(model.weights)
    out = logsumexp(_component_logpdf(X, model.means, model.covariances) + logw, axis=1)
    return float(out[0]) if single else out
