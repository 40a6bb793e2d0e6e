"""LEVEL_IW: importance-weighted least-squares probabilistic classification, chained over batches.

Each step treats the previous batch (with the labels predicted for it) as the
training set and the current batch as the test set.  Training instances are
reweighted by a uLSIF estimate of the test/train density ratio before the
per-class kernel ridge fit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist


class SingularSystemError(np.linalg.LinAlgError):
    """The ridge system could not be solved (typically lambda = 0 on a degenerate basis)."""


@dataclass(frozen=True)
class LevelIwParams:
    sigma: float = 1.0
    lam: float = 0.1
    basis_count: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.basis_count < 1:
            raise ValueError("basis_count must be at least 1")


def gaussian_kernel(X, C, sigma: float) -> np.ndarray:
    return np.exp(-cdist(X, C, "sqeuclidean") / (2.0 * sigma * sigma))


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        sol = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError("non-finite solution")
    return sol


def ulsif_weights(train_x, test_x, sigma: float, lam: float = 0.1, b: int = 100, seed: int = 0) -> np.ndarray:
    """Non-negative importance weights p_test(x) / p_train(x) at the training points."""
    Xtr = np.asarray(train_x, dtype=float)
    Xte = np.asarray(test_x, dtype=float)
    if len(Xtr) == 0 or len(Xte) == 0:
        raise ValueError("train and test sets must be non-empty")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    b = min(b, len(Xte))
    rng = np.random.default_rng(seed)
    centers = Xte[np.sort(rng.choice(len(Xte), size=b, replace=False))]
    Phi_tr = gaussian_kernel(Xtr, centers, sigma)
    H = Phi_tr.T @ Phi_tr / len(Xtr)
    h = gaussian_kernel(Xte, centers, sigma).mean(axis=0)
    beta = _solve(H + lam * np.eye(b), h)
    return np.maximum(Phi_tr @ beta, 0.0)


@dataclass(frozen=True)
class PosteriorModel:
    centers: np.ndarray
    coefficients: np.ndarray  # (n_classes, n_centers)
    classes: np.ndarray
    sigma: float
    missing_classes: tuple = ()


def iwlspc_fit(train_x, train_y, weights, sigma: float, lam: float = 0.1, classes=None) -> PosteriorModel:
    X = np.asarray(train_x, dtype=float)
    y = np.asarray(train_y)
    w = np.asarray(weights, dtype=float)
    if not (len(X) == len(y) == len(w)) or len(X) == 0:
        raise ValueError("train_x, train_y and weights must be non-empty and aligned")
    classes = np.unique(y) if classes is None else np.asarray(classes)
    K = gaussian_kernel(X, X, sigma)
    KW = K.T * w
    A = KW @ K + lam * np.eye(len(X))
    onehot = (y[:, None] == classes[None, :]).astype(float)
    theta = _solve(A, KW @ onehot).T
    missing = tuple(c for c in classes if not np.any(y == c))
    return PosteriorModel(X, theta, classes, sigma, missing)


def iwlspc_predict(model: PosteriorModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Labels and clipped, normalized per-class posteriors for each row of ``x``."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[1] != model.centers.shape[1]:
        raise ValueError("dimension mismatch")
    scores = np.maximum(gaussian_kernel(X, model.centers, model.sigma) @ model.coefficients.T, 0.0)
    total = scores.sum(axis=1, keepdims=True)
    uniform = np.full_like(scores, 1.0 / scores.shape[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        post = np.where(total > 0, scores / np.where(total > 0, total, 1.0), uniform)
    return model.classes[post.argmax(axis=1)], post


@dataclass(frozen=True)
class LevelIwState:
    train_X: np.ndarray
    train_y: np.ndarray
    classes: np.ndarray
    params: LevelIwParams
    step: int = 0
    class_loss_events: int = 0


def leveliw_init(initial_X, initial_y, params: LevelIwParams) -> LevelIwState:
    X = np.asarray(initial_X, dtype=float)
    y = np.asarray(initial_y)
    if len(X) == 0 or len(X) != len(y):
        raise ValueError("initial labeled data must be non-empty with one label per instance")
    return LevelIwState(X.copy(), y.copy(), np.unique(y), params)


def leveliw_step(state: LevelIwState, batch) -> tuple[np.ndarray, LevelIwState]:
    U = np.asarray(batch, dtype=float)
    if U.ndim != 2 or len(U) == 0:
        raise ValueError("batch must be a non-empty (n, d) array")
    p = state.params
    w = ulsif_weights(state.train_X, U, p.sigma, p.lam, p.basis_count, seed=p.seed + state.step)
    model = iwlspc_fit(state.train_X, state.train_y, w, p.sigma, p.lam, classes=state.classes)
    pred, _ = iwlspc_predict(model, U)
    return pred, replace(
        state,
        train_X=U,
        train_y=pred,
        step=state.step + 1,
        class_loss_events=state.class_loss_events + len(model.missing_classes),
    )
