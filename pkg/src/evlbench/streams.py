"""Synthetic drifting streams and CSV stream ingestion.

Every family is a mixture of isotropic Gaussian components whose means move
with time.  Distances are expressed in units of the nominal inter-class
distance (1.0), so ``class_overlap`` is directly the component standard
deviation.  Time 0 is the labeled initial draw; unlabeled batch ``i`` is drawn
at time ``i + 1``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

FAMILIES = (
    "translating-gaussians",
    "rotating-classes",
    "crossing-surround",
    "multimodal-gaussians",
    "gears-ring",
)
PLANAR_FAMILIES = frozenset(FAMILIES) - {"translating-gaussians"}


class StreamError(ValueError):
    """Invalid stream specification or malformed stream file."""


@dataclass(frozen=True)
class StreamSpec:
    family: str = "translating-gaussians"
    class_count: int = 2
    modes_per_class: int = 1
    dimension: int = 2
    total_instances: int = 15000
    batch_size: int = 150
    drift_rate: float = 0.005
    class_overlap: float = 0.15
    seed: int = 0

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise StreamError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.batch_size <= 0:
            raise StreamError("batch_size must be positive")
        if self.total_instances <= 0 or self.total_instances % self.batch_size:
            raise StreamError("total_instances must be a positive multiple of batch_size")
        if self.class_count < 2:
            raise StreamError("class_count must be at least 2")
        if self.modes_per_class < 1:
            raise StreamError("modes_per_class must be at least 1")
        if self.family == "multimodal-gaussians" and self.modes_per_class < 2:
            raise StreamError("multimodal-gaussians needs modes_per_class >= 2")
        if self.dimension < 1:
            raise StreamError("dimension must be positive")
        if self.family in PLANAR_FAMILIES and self.dimension < 2:
            raise StreamError(f"family {self.family!r} requires dimension >= 2")
        if self.drift_rate < 0 or self.class_overlap < 0:
            raise StreamError("drift_rate and class_overlap must be non-negative")
        widest = max(len(m) for m in _component_counts(self))
        if self.batch_size < self.class_count * widest:
            raise StreamError(
                f"batch_size {self.batch_size} cannot cover every class and mode "
                f"({self.class_count} classes x {widest} modes)"
            )

    @property
    def batch_count(self) -> int:
        return self.total_instances // self.batch_size

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "StreamSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise StreamError(f"unknown StreamSpec fields: {sorted(unknown)}")
        missing = names - set(doc)
        if missing:
            raise StreamError(f"missing StreamSpec fields: {sorted(missing)}")
        spec = cls(
            family=str(doc["family"]),
            class_count=int(doc["class_count"]),
            modes_per_class=int(doc["modes_per_class"]),
            dimension=int(doc["dimension"]),
            total_instances=int(doc["total_instances"]),
            batch_size=int(doc["batch_size"]),
            drift_rate=float(doc["drift_rate"]),
            class_overlap=float(doc["class_overlap"]),
            seed=int(doc["seed"]),
        )
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, text: str) -> "StreamSpec":
        return cls.from_dict(json.loads(text))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DriftStream:
    """Initial labeled data plus unlabeled batches.

    Algorithms only ever see ``initial_X``/``initial_y`` and what
    :meth:`next_batch` returns.  Ground truth for the batches is reachable only
    through :meth:`hidden_labels`, which the evaluation code uses for scoring.
    """

    initial_X: np.ndarray
    initial_y: np.ndarray
    _batches: tuple = field(repr=False)
    _hidden: tuple = field(repr=False)
    dataset_id: str = "stream"
    spec: StreamSpec | None = None
    source_sha256: str = ""

    def __post_init__(self):
        if len(self._batches) != len(self._hidden):
            raise StreamError("batches and hidden labels must align")
        for X, y in zip(self._batches, self._hidden):
            if len(X) != len(y):
                raise StreamError("batch and label counts differ")

    @property
    def batch_count(self) -> int:
        return len(self._batches)

    @property
    def dimension(self) -> int:
        return self.initial_X.shape[1]

    @property
    def instance_count(self) -> int:
        return sum(len(b) for b in self._batches)

    def next_batch(self, t: int) -> np.ndarray:
        if not 0 <= t < len(self._batches):
            raise IndexError(f"batch index {t} out of range [0, {len(self._batches)})")
        return self._batches[t]

    def hidden_labels(self, t: int) -> np.ndarray:
        """Ground truth of batch ``t``; evaluation only."""
        if not 0 <= t < len(self._hidden):
            raise IndexError(f"batch index {t} out of range [0, {len(self._hidden)})")
        return self._hidden[t]

    def with_hidden_labels(self, labels) -> "DriftStream":
        """Copy with replaced ground truth (used by the label-poisoning canary)."""
        labels = tuple(_readonly(np.asarray(y, dtype=np.int64)) for y in labels)
        return DriftStream(
            self.initial_X, self.initial_y, self._batches, labels, self.dataset_id, self.spec,
            self.source_sha256,
        )


# -- generators -------------------------------------------------------------


def _component_counts(spec: StreamSpec) -> list[list[int]]:
    """Mode indices per class."""
    m = spec.modes_per_class
    if spec.family == "gears-ring":
        return [list(range(m))] + [list(range(max(6, m)))] * (spec.class_count - 1)
    return [list(range(m)) for _ in range(spec.class_count)]


def _rotate(xy: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * xy[0] - s * xy[1], s * xy[0] + c * xy[1]])


def component_means(spec: StreamSpec, time: float) -> list[np.ndarray]:
    """Component means at ``time``; entry ``c`` has shape (modes of class c, d)."""
    C, M, d, rate = spec.class_count, spec.modes_per_class, spec.dimension, spec.drift_rate
    out = []
    counts = _component_counts(spec)
    for c in range(C):
        means = np.zeros((len(counts[c]), d))
        for m in counts[c]:
            means[m, :2] = _planar_mean(spec.family, c, m, C, M, len(counts[c]), rate, time)[: min(d, 2)]
        out.append(means)
    return out


def _planar_mean(family, c, m, C, M, n_modes, rate, t):
    if family == "translating-gaussians":
        # neighbours start 2 apart on the x axis with alternating lateral offsets
        # and travel towards each other, passing at a lateral distance of 1
        side = 1.0 if c % 2 == 0 else -1.0
        x0 = (c - (C - 1) / 2.0) * 2.0
        y0 = side * (0.5 + m)
        return np.array([x0 + side * rate * t, y0])
    if family in ("rotating-classes", "multimodal-gaussians"):
        n = C * M
        slot = c * M + m if family == "rotating-classes" else m * C + c
        radius = 0.5 / math.sin(math.pi / n)
        angle = 2.0 * math.pi * slot / n + rate * t
        return np.array([radius * math.cos(angle), radius * math.sin(angle)])
    if family == "crossing-surround":
        if c == C - 1:
            # orbit of radius 1 centred at (1, 0): passes through the origin
            phi = rate * t
            return np.array([1.0 + math.cos(phi), math.sin(phi) + 1.5 * m])
        return np.array([-2.0 * c, 1.5 * m])
    if family == "gears-ring":
        if c == 0:
            if n_modes == 1:
                return np.zeros(2)
            return _rotate(np.array([0.5, 0.0]), 2.0 * math.pi * m / n_modes + rate * t)
        radius = 1.0 + 1.0 * c
        return _rotate(np.array([radius, 0.0]), 2.0 * math.pi * m / n_modes - rate * t)
    raise StreamError(f"unknown family {family!r}")


def _draw(spec: StreamSpec, time: float, n: int, rng: np.random.Generator):
    means = component_means(spec, time)
    C = spec.class_count
    idx = np.arange(n)
    labels = idx % C
    centers = np.empty((n, spec.dimension))
    for c in range(C):
        rows = idx[labels == c]
        modes = (rows // C) % len(means[c])
        centers[rows] = means[c][modes]
    X = centers + spec.class_overlap * rng.standard_normal((n, spec.dimension))
    order = rng.permutation(n)
    return X[order], labels[order].astype(np.int64)


def generate_stream(spec: StreamSpec) -> DriftStream:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    X0, y0 = _draw(spec, 0.0, spec.batch_size, rng)
    batches, hidden = [], []
    for i in range(spec.batch_count):
        X, y = _draw(spec, float(i + 1), spec.batch_size, rng)
        batches.append(_readonly(X))
        hidden.append(_readonly(y))
    dataset_id = f"{spec.family}-c{spec.class_count}-d{spec.dimension}-s{spec.seed}"
    return DriftStream(_readonly(X0), _readonly(y0), tuple(batches), tuple(hidden), dataset_id, spec)


# -- CSV --------------------------------------------------------------------


def _parse_rows(path: Path, header: bool):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            rows.append((lineno, row))
    if not rows:
        raise StreamError(f"{path}: no data rows")
    width = len(rows[0][1])
    if width < 2:
        raise StreamError(f"{path}: row {rows[0][0]} has no label column")
    X = np.empty((len(rows), width - 1))
    y = np.empty(len(rows), dtype=np.int64)
    for i, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise StreamError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row[:-1]):
            try:
                X[i, j] = float(cell)
            except ValueError:
                raise StreamError(
                    f"{path}: row {lineno}, column {j + 1}: non-numeric feature {cell!r}"
                ) from None
        try:
            label = float(row[-1])
        except ValueError:
            raise StreamError(f"{path}: row {lineno}, column {width}: bad label {row[-1]!r}") from None
        if label != int(label):
            raise StreamError(f"{path}: row {lineno}, column {width}: label must be an integer")
        y[i] = int(label)
    return X, y


def load_csv_stream(path, labeled_prefix_count: int, batch_size: int, header: bool = False) -> DriftStream:
    path = Path(path)
    if labeled_prefix_count <= 0 or batch_size <= 0:
        raise StreamError("labeled_prefix_count and batch_size must be positive")
    if not path.is_file():
        raise FileNotFoundError(f"stream file not found: {path}")
    X, y = _parse_rows(path, header)
    if labeled_prefix_count > len(X):
        raise StreamError(
            f"{path}: labeled prefix {labeled_prefix_count} exceeds row count {len(X)}"
        )
    rest = np.arange(labeled_prefix_count, len(X))
    chunks = [rest[i : i + batch_size] for i in range(0, len(rest), batch_size)]
    return DriftStream(
        _readonly(X[:labeled_prefix_count]),
        _readonly(y[:labeled_prefix_count]),
        tuple(_readonly(X[c]) for c in chunks),
        tuple(_readonly(y[c]) for c in chunks),
        dataset_id=path.stem,
        source_sha256=hashlib.sha256(path.read_bytes()).hexdigest(),
    )


def write_csv_stream(stream: DriftStream, path) -> None:
    """Write initial data then every batch, one labeled instance per row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        parts = [(stream.initial_X, stream.initial_y)]
        parts += [(stream.next_batch(t), stream.hidden_labels(t)) for t in range(stream.batch_count)]
        for X, y in parts:
            for row, label in zip(X, y):
                w.writerow([repr(float(v)) for v in row] + [int(label)])
