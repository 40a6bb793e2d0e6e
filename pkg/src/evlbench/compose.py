"""COMPOSE and FAST COMPOSE.

Each step labels the incoming batch with cluster-and-label seeded by the
current labeled set, then extracts per-class core supports that become the
labeled set for the next step.  With identity extraction (FAST COMPOSE) only
the freshly labeled batch is carried forward; otherwise the current labeled
set is pooled with the new labels before extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .clustering import cluster_and_label
from .core_support import CseParams, extract_core_supports


@dataclass(frozen=True)
class ComposeState:
    labeled: np.ndarray
    labels: np.ndarray
    k: int
    cse: CseParams
    classes: np.ndarray
    seed: int = 0
    step: int = 0
    class_loss_events: int = 0
    lost_classes: tuple = field(default_factory=tuple)


def compose_init(initial_X, initial_y, k: int, cse: CseParams, seed: int = 0, classes=None) -> ComposeState:
    X = np.asarray(initial_X, dtype=float)
    y = np.asarray(initial_y)
    if len(X) == 0 or len(X) != len(y):
        raise ValueError("initial labeled data must be non-empty with one label per instance")
    present = np.unique(y)
    classes = present if classes is None else np.asarray(classes)
    missing = np.setdiff1d(classes, present)
    if len(missing):
        raise ValueError(f"class {missing[0]} has no labeled instances")
    if k < 1:
        raise ValueError("k must be at least 1")
    return ComposeState(X.copy(), y.copy(), k, cse, classes, seed)


def compose_step(state: ComposeState, batch) -> tuple[np.ndarray, ComposeState]:
    U = np.asarray(batch, dtype=float)
    if U.ndim != 2 or len(U) == 0:
        raise ValueError("batch must be a non-empty (n, d) array")
    if U.shape[1] != state.labeled.shape[1]:
        raise ValueError(f"batch dimension {U.shape[1]} != {state.labeled.shape[1]}")
    seed = state.seed + state.step
    k = min(state.k, len(state.labeled) + len(U))
    pred = cluster_and_label(state.labeled, state.labels, U, k, seed=seed)

    if state.cse.method == "identity":
        DX, Dy = U, pred
    else:
        DX = np.vstack([state.labeled, U])
        Dy = np.concatenate([state.labels, pred])

    keep_X, keep_y, lost = [], [], []
    for c in state.classes:
        members = DX[Dy == c]
        if len(members) == 0:
            lost.append(c)
            continue
        cse = state.cse
        if cse.method == "gmm-density" and cse.gmm_components > len(members):
            cse = replace(cse, gmm_components=len(members))
        cs = extract_core_supports(members, c, cse, seed=seed)
        keep_X.append(cs.instances)
        keep_y.append(np.full(len(cs.instances), c, dtype=Dy.dtype))
    nxt = replace(
        state,
        labeled=np.vstack(keep_X),
        labels=np.concatenate(keep_y),
        step=state.step + 1,
        class_loss_events=state.class_loss_events + len(lost),
        lost_classes=state.lost_classes + tuple(lost),
    )
    return pred, nxt
