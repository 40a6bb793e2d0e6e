"""Core-support extraction: alpha-shape peeling, GMM density ranking, or identity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import gmm_fit, gmm_logpdf
from .geometry import default_alpha, peel_compaction

METHODS = ("alpha-shape-2d", "gmm-density", "identity")


@dataclass(frozen=True)
class CseParams:
    method: str = "identity"
    cp: float = 0.35
    alpha: float | None = None  # None: twice the mean nearest-neighbour distance
    gmm_components: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown CSE method {self.method!r}; expected one of {METHODS}")
        if not 0.0 < self.cp <= 1.0:
            raise ValueError("cp must lie in (0, 1]")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.gmm_components < 1:
            raise ValueError("gmm_components must be at least 1")


@dataclass(frozen=True)
class CoreSupports:
    instances: np.ndarray
    label: int
    indices: np.ndarray  # positions in the class input


def extract_core_supports(class_points, label, params: CseParams, seed: int = 0) -> CoreSupports:
    X = np.asarray(class_points, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError(f"class {label!r} has no instances")
    n = len(X)
    if params.method == "identity":
        keep = np.arange(n)
    elif params.method == "gmm-density":
        if params.gmm_components > n:
            raise ValueError(f"K={params.gmm_components} exceeds class size {n}")
        model = gmm_fit(X, params.gmm_components, seed=seed)
        score = gmm_logpdf(model, X)
        keep = np.sort(np.argsort(-score, kind="stable")[: math.ceil(params.cp * n)])
    else:
        if X.shape[1] != 2:
            raise ValueError(f"alpha-shape core supports need 2-D data, got d={X.shape[1]}")
        alpha = params.alpha if params.alpha is not None else default_alpha(X)
        keep = peel_compaction(X, alpha, params.cp)
    return CoreSupports(X[keep], label, keep)
