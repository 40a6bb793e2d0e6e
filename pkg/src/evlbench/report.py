"""CSV, Markdown and SVG output for benchmark results."""

from __future__ import annotations

import csv
import io
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from .harness import RankTable, RunResult, average_rank

FOOTER = "Average Rank (lower is better)"
DISPLAY_NAMES = {
    "compose-alpha": "COMPOSE (α-shape)",
    "compose-gmm": "COMPOSE (GMM)",
    "fast-compose": "FAST COMPOSE",
    "scargc": "SCARGC (1-NN)",
    "mclassification": "MClassification",
    "level-iw": "LEVEL_IW",
}
RESULT_COLUMNS = (
    "algorithm",
    "params",
    "fingerprint",
    "dataset",
    "dataset_ref",
    "per_batch_accuracy",
    "average_accuracy",
    "wall_seconds",
    "class_loss_events",
    "seed",
    "prediction_digest",
)


class ReportError(ValueError):
    pass


@dataclass
class ReportBundle:
    results: list
    rank_tables: dict = field(default_factory=dict)  # name -> RankTable
    sweeps: dict = field(default_factory=dict)  # name -> (param, list of RunResult)
    out_dir: Path | str = "."


# -- CSV ---------------------------------------------------------------------


def results_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in results:
        rec = r.to_record()
        row = []
        for col in RESULT_COLUMNS:
            v = rec[col]
            if col == "params":
                v = json.dumps(v, sort_keys=True)
            elif col == "per_batch_accuracy":
                v = ";".join(repr(float(a)) for a in v)
            elif isinstance(v, float):
                v = repr(v)
            row.append(v)
        w.writerow(row)
    return buf.getvalue()


def results_from_csv(text: str) -> list:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        if tuple(row) != RESULT_COLUMNS:
            raise ReportError(f"unexpected columns {list(row)}")
        acc = row["per_batch_accuracy"]
        out.append(
            RunResult(
                algorithm=row["algorithm"],
                params=json.loads(row["params"]),
                fingerprint=row["fingerprint"],
                dataset=row["dataset"],
                dataset_ref=row["dataset_ref"],
                per_batch_accuracy=[float(a) for a in acc.split(";")] if acc else [],
                average_accuracy=float(row["average_accuracy"]),
                wall_seconds=float(row["wall_seconds"]),
                class_loss_events=int(row["class_loss_events"]),
                seed=int(row["seed"]),
                prediction_digest=row["prediction_digest"],
            )
        )
    return out


def rank_table_to_csv(table: RankTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset"] + [f"{a}:{kind}" for a in table.algorithms for kind in ("value", "rank")])
    for ds in table.datasets:
        row = [ds]
        for a in table.algorithms:
            row += [repr(float(table.values[ds][a])), repr(float(table.ranks[ds][a]))]
        w.writerow(row)
    w.writerow([FOOTER] + [x for a in table.algorithms for x in ("", repr(table.average[a]))])
    return buf.getvalue()


def sweep_to_csv(param: str, results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "algorithm", param, "average_accuracy"])
    for r in results:
        w.writerow([r.dataset, r.algorithm, repr(r.params[param]), repr(r.average_accuracy)])
    return buf.getvalue()


# -- Markdown ----------------------------------------------------------------


def _name(algo: str) -> str:
    return DISPLAY_NAMES.get(algo, algo)


def rank_table_markdown(table: RankTable, title: str = "") -> str:
    scale = 1.0 if table.metric == "wall_seconds" else 100.0
    lines = [f"### {title}", ""] if title else []
    lines.append("| DATASETS | " + " | ".join(_name(a) for a in table.algorithms) + " |")
    lines.append("|---" * (len(table.algorithms) + 1) + "|")
    for ds in table.datasets:
        cells = [f"{scale * table.values[ds][a]:.2f}({table.ranks[ds][a]:g})" for a in table.algorithms]
        lines.append(f"| {ds} | " + " | ".join(cells) + " |")
    lines.append(f"| {FOOTER} | " + " | ".join(f"{table.average[a]:.4f}" for a in table.algorithms) + " |")
    return "\n".join(lines) + "\n"


def sweep_markdown(name: str, param: str, results) -> str:
    lines = [f"### {name}", "", f"| DATASET | ALGORITHM | {param} | ACCURACY |", "|---|---|---|---|"]
    for r in results:
        lines.append(f"| {r.dataset} | {_name(r.algorithm)} | {r.params[param]} | {100 * r.average_accuracy:.2f} |")
    return "\n".join(lines) + "\n"


# -- SVG ---------------------------------------------------------------------


def accuracy_svg(result: RunResult, width: int = 480, height: int = 240, pad: int = 32) -> str:
    """Per-batch accuracy against batch index as a single polyline."""
    acc = result.per_batch_accuracy
    if not acc:
        raise ReportError(f"{result.algorithm} on {result.dataset}: empty accuracy list")
    n = len(acc)
    span_x = width - 2 * pad
    span_y = height - 2 * pad
    pts = []
    for i, a in enumerate(acc):
        x = pad + (span_x * i / (n - 1) if n > 1 else span_x / 2)
        y = pad + span_y * (1.0 - a)
        pts.append(f"{x:.2f},{y:.2f}")
    title = escape(f"{_name(result.algorithm)} on {result.dataset}")
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f"<title>{title}</title>\n"
        f'<rect x="{pad}" y="{pad}" width="{span_x}" height="{span_y}" fill="none" stroke="#999"/>\n'
        f'<text x="{width / 2}" y="{height - 6}" text-anchor="middle" font-size="11">batch index</text>\n'
        f'<text x="10" y="{height / 2}" font-size="11" transform="rotate(-90 10 {height / 2})" '
        f'text-anchor="middle">accuracy</text>\n'
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="9">1</text>\n'
        f'<text x="{pad - 4}" y="{height - pad + 4}" text-anchor="end" font-size="9">0</text>\n'
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{" ".join(pts)}"/>\n'
        "</svg>\n"
    )


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text).strip("_") or "x"


# -- bundle ------------------------------------------------------------------


def build_bundle(results, out_dir, sweeps=None) -> ReportBundle:
    """Bundle results with accuracy and runtime rank tables (when every cell is present)."""
    results = list(results)
    tables = {}
    if results:
        try:
            tables = {
                "accuracy": average_rank(results, "average_accuracy"),
                "runtime": average_rank(results, "wall_seconds"),
            }
        except ValueError:
            tables = {}
    return ReportBundle(results, tables, dict(sweeps or {}), out_dir)


def render_files(bundle: ReportBundle) -> dict:
    """Render every output in memory; raises before anything touches the disk."""
    if not bundle.results and not bundle.sweeps:
        raise ReportError("nothing to render: bundle is empty")
    files = {}
    all_runs = list(bundle.results) + [r for _, rs in bundle.sweeps.values() for r in rs]
    for r in all_runs:
        if not r.per_batch_accuracy:
            raise ReportError(f"{r.algorithm} on {r.dataset}: empty accuracy list")
    if bundle.results:
        files["results.csv"] = results_to_csv(bundle.results)
    md = []
    titles = {"accuracy": "Average accuracy (%)", "runtime": "Average execution time (s)"}
    for name, table in bundle.rank_tables.items():
        files[f"table_{_slug(name)}.csv"] = rank_table_to_csv(table)
        md.append(rank_table_markdown(table, titles.get(name, name)))
    for name, (param, runs) in bundle.sweeps.items():
        files[f"sweep_{_slug(name)}.csv"] = sweep_to_csv(param, runs)
        md.append(sweep_markdown(name, param, runs))
    if md:
        files["tables.md"] = "\n".join(md)
    for r in bundle.results:
        files[f"plots/{_slug(r.algorithm)}__{_slug(r.dataset)}.svg"] = accuracy_svg(r)
    return files


def render_report(bundle: ReportBundle) -> list:
    """Write the rendered bundle under ``bundle.out_dir`` and return the written paths."""
    files = render_files(bundle)
    root = Path(bundle.out_dir)
    written = []
    try:
        root.mkdir(parents=True, exist_ok=True)
        if not os.access(root, os.W_OK):
            raise PermissionError(f"output directory {root} is not writable")
        for rel, text in files.items():
            path = root / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        for p in written:
            p.unlink(missing_ok=True)
        raise ReportError(f"cannot write report to {root}: {exc}") from exc
    return written
