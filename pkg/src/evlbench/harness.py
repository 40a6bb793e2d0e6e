"""Prequential EVL runs, average ranks and parameter sweeps."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata
from threadpoolctl import threadpool_limits

from .compose import compose_init, compose_step
from .core_support import CseParams
from .leveliw import LevelIwParams, leveliw_init, leveliw_step
from .mclass import mclass_init, mclass_predict_batch
from .scargc import scargc_init, scargc_step
from .streams import DriftStream

# None means "derive from the stream" (see AlgorithmConfig.resolve)
DEFAULTS = {
    "compose-alpha": {"k": None, "cp": 0.35, "alpha": None},
    "compose-gmm": {"k": None, "cp": 0.35, "gmm_components": None},
    "fast-compose": {"k": None},
    "scargc": {"k": None, "pool_size": None},
    "mclassification": {"r": 0.1, "normalize": False},
    "level-iw": {"sigma": 1.0, "lam": 0.1, "basis_count": 100},
}
ALGORITHMS = tuple(DEFAULTS)
SWEEPABLE = {
    "compose-alpha": "k",
    "compose-gmm": "k",
    "fast-compose": "k",
    "scargc": "k",
    "mclassification": "r",
    "level-iw": "sigma",
}
PARAM_ALIASES = {"σ": "sigma", "lambda": "lam", "λ": "lam"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmConfig:
    algo: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algo not in DEFAULTS:
            raise ConfigError(f"unknown algorithm {self.algo!r}; expected one of {ALGORITHMS}")
        params = {PARAM_ALIASES.get(k, k): v for k, v in self.params.items()}
        unknown = set(params) - set(DEFAULTS[self.algo])
        if unknown:
            raise ConfigError(f"{self.algo} has no parameter(s) {sorted(unknown)}")
        object.__setattr__(self, "params", params)

    def resolve(self, stream: DriftStream) -> dict:
        """Fill stream-dependent defaults: k = classes x modes, pool = batch size."""
        out = dict(DEFAULTS[self.algo])
        out.update(self.params)
        classes = len(np.unique(stream.initial_y))
        modes = stream.spec.modes_per_class if stream.spec is not None else 1
        if "k" in out and out["k"] is None:
            out["k"] = classes * modes
        if out.get("gmm_components", 0) is None:
            out["gmm_components"] = modes
        if "pool_size" in out and out["pool_size"] is None:
            out["pool_size"] = len(stream.next_batch(0)) if stream.batch_count else 1
        return out

    def with_param(self, name: str, value) -> "AlgorithmConfig":
        return AlgorithmConfig(self.algo, {**self.params, name: value}, self.seed)


class _Runner:
    """Uniform init/predict wrapper around the per-algorithm state machines."""

    def __init__(self, algo: str, params: dict, seed: int):
        self.algo, self.p, self.seed = algo, params, seed
        self.state = None
        self.scale = None

    def start(self, X, y):
        p, algo = self.p, self.algo
        if algo in ("compose-alpha", "compose-gmm", "fast-compose"):
            method = {"compose-alpha": "alpha-shape-2d", "compose-gmm": "gmm-density"}.get(algo, "identity")
            if method == "alpha-shape-2d" and X.shape[1] != 2:
                raise ConfigError("compose-alpha needs 2-D data")
            cse = CseParams(
                method,
                cp=p.get("cp", 0.35),
                alpha=p.get("alpha"),
                gmm_components=p.get("gmm_components") or 1,
            )
            self.state = compose_init(X, y, int(p["k"]), cse, seed=self.seed)
        elif algo == "scargc":
            self.state = scargc_init(X, y, int(p["k"]), int(p["pool_size"]), seed=self.seed)
        elif algo == "mclassification":
            if p["normalize"]:
                lo, hi = X.min(axis=0), X.max(axis=0)
                span = np.where(hi > lo, hi - lo, 1.0)
                self.scale = (lo, span)
            self.state = mclass_init(self._scaled(X), y, float(p["r"]))
        else:
            params = LevelIwParams(float(p["sigma"]), float(p["lam"]), int(p["basis_count"]), self.seed)
            self.state = leveliw_init(X, y, params)

    def _scaled(self, X):
        if self.scale is None:
            return X
        lo, span = self.scale
        return (X - lo) / span

    def predict(self, batch) -> np.ndarray:
        if self.algo in ("compose-alpha", "compose-gmm", "fast-compose"):
            pred, self.state = compose_step(self.state, batch)
        elif self.algo == "scargc":
            pred, self.state = scargc_step(self.state, batch)
        elif self.algo == "mclassification":
            pred = mclass_predict_batch(self.state, self._scaled(batch))
        else:
            pred, self.state = leveliw_step(self.state, batch)
        return pred

    @property
    def class_loss_events(self) -> int:
        return int(getattr(self.state, "class_loss_events", 0))


def prediction_digest(predictions) -> str:
    h = hashlib.sha256()
    for p in predictions:
        h.update(np.ascontiguousarray(np.asarray(p, dtype=np.int64)).tobytes())
        h.update(b"|")
    return h.hexdigest()


@dataclass
class RunResult:
    algorithm: str
    params: dict
    fingerprint: str
    dataset: str
    dataset_ref: str
    per_batch_accuracy: list
    average_accuracy: float
    wall_seconds: float
    class_loss_events: int
    seed: int
    prediction_digest: str
    predictions: list = field(default=None, repr=False, compare=False)

    def to_record(self) -> dict:
        d = asdict(self)
        d.pop("predictions")
        return d

    @classmethod
    def from_record(cls, d: dict) -> "RunResult":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k != "predictions"})


def _fingerprint(algo: str, params: dict, seed: int) -> str:
    return json.dumps({"algorithm": algo, "params": params, "seed": seed}, sort_keys=True)


def run_stream(config: AlgorithmConfig, stream: DriftStream) -> RunResult:
    """Feed the initial labeled data once, then each unlabeled batch in order.

    Only algorithm compute is timed, on a single BLAS thread; scoring against
    the hidden labels happens outside the timed region.
    """
    params = config.resolve(stream)
    runner = _Runner(config.algo, params, config.seed)
    preds = []
    with threadpool_limits(limits=1):
        t0 = time.perf_counter()
        runner.start(stream.initial_X, stream.initial_y)
        elapsed = time.perf_counter() - t0
        for t in range(stream.batch_count):
            batch = stream.next_batch(t)
            t0 = time.perf_counter()
            pred = runner.predict(batch)
            elapsed += time.perf_counter() - t0
            preds.append(np.asarray(pred))
    acc = [float(np.mean(p == stream.hidden_labels(t))) for t, p in enumerate(preds)]
    if stream.spec is not None:
        ref = stream.spec.to_json()
    else:
        ref = f"sha256:{stream.source_sha256}"
    return RunResult(
        algorithm=config.algo,
        params=params,
        fingerprint=_fingerprint(config.algo, params, config.seed),
        dataset=stream.dataset_id,
        dataset_ref=ref,
        per_batch_accuracy=acc,
        average_accuracy=float(np.mean(acc)) if acc else float("nan"),
        wall_seconds=elapsed,
        class_loss_events=runner.class_loss_events,
        seed=config.seed,
        prediction_digest=prediction_digest(preds),
        predictions=preds,
    )


def label_canary(config: AlgorithmConfig, stream: DriftStream, seed: int = 12345) -> bool:
    """True when scrambling the hidden batch labels leaves every prediction unchanged."""
    rng = np.random.default_rng(seed)
    labels = np.unique(stream.initial_y)
    poisoned = stream.with_hidden_labels(
        [rng.choice(labels, size=len(stream.hidden_labels(t))) for t in range(stream.batch_count)]
    )
    a = run_stream(config, stream)
    b = run_stream(config, poisoned)
    return a.prediction_digest == b.prediction_digest and all(
        np.array_equal(x, y) for x, y in zip(a.predictions, b.predictions)
    )


@dataclass
class RankTable:
    datasets: list
    algorithms: list
    values: dict  # dataset -> algorithm -> metric value
    ranks: dict  # dataset -> algorithm -> rank
    average: dict  # algorithm -> mean rank
    metric: str = "average_accuracy"


def average_rank(results, metric: str = "average_accuracy") -> RankTable:
    """Rank algorithms within each dataset (1 = best, ties share the mean rank).

    Accuracy ranks descending; ``wall_seconds`` ranks ascending.
    """
    table: dict = {}
    algorithms: list = []
    for r in results:
        table.setdefault(r.dataset, {})[r.algorithm] = getattr(r, metric)
        if r.algorithm not in algorithms:
            algorithms.append(r.algorithm)
    if not table:
        raise ValueError("no results to rank")
    datasets = list(table)
    ranks = {}
    for ds in datasets:
        missing = [a for a in algorithms if a not in table[ds]]
        if missing:
            raise ValueError(f"dataset {ds!r} has no result for {missing}")
        vals = np.array([table[ds][a] for a in algorithms], dtype=float)
        key = vals if metric == "wall_seconds" else -vals
        ranks[ds] = dict(zip(algorithms, rankdata(key, method="average").tolist()))
    average = {a: float(np.mean([ranks[ds][a] for ds in datasets])) for a in algorithms}
    return RankTable(datasets, algorithms, table, ranks, average, metric)


def sensitivity_sweep(config: AlgorithmConfig, stream: DriftStream, param: str, values) -> list:
    """One run per value; every other parameter and the seed stay fixed."""
    param = PARAM_ALIASES.get(param, param)
    if SWEEPABLE[config.algo] != param:
        raise ConfigError(
            f"{config.algo} sweeps {SWEEPABLE[config.algo]!r}, not {param!r}"
        )
    return [run_stream(config.with_param(param, v), stream) for v in values]
