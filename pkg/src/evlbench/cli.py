"""Command-line front end: generate, run, bench, sweep, report.

Exit status: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .harness import (
    ALGORITHMS,
    PARAM_ALIASES,
    AlgorithmConfig,
    ConfigError,
    RunResult,
    run_stream,
    sensitivity_sweep,
)
from .report import ReportError, build_bundle, render_report, sweep_markdown
from .streams import StreamError, StreamSpec, generate_stream, load_csv_stream, write_csv_stream

OUT_ENV = "EVLBENCH_OUT"
EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _default_out() -> Path:
    return Path(os.environ.get(OUT_ENV) or ".")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_sets(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {pair!r}")
        out[key.strip()] = _parse_value(value.strip())
    return out


def _read_json(path: Path):
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _load_dataset(path, args):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    if path.suffix.lower() == ".json":
        return generate_stream(StreamSpec.from_dict(_read_json(path)))
    if args.labeled is None or args.batch_size is None:
        raise UsageError(f"{path}: CSV datasets need --labeled and --batch-size")
    return load_csv_stream(path, args.labeled, args.batch_size, header=args.header)


def _dataset_args(p, multiple=False):
    if multiple:
        p.add_argument("--dataset", action="append", required=True, metavar="PATH",
                       help="StreamSpec .json or stream .csv (repeatable)")
    else:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--spec", metavar="JSON", help="StreamSpec JSON document")
        src.add_argument("--data", metavar="CSV", help="stream CSV: features then integer label")
    p.add_argument("--labeled", type=int, help="labeled prefix rows (CSV input)")
    p.add_argument("--batch-size", type=int, help="batch size (CSV input)")
    p.add_argument("--header", action="store_true", help="skip one header line in CSV input")


def _single_dataset(args):
    return _load_dataset(args.spec or args.data, args)


def _write_json(path: Path, doc) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None


def cmd_generate(args) -> int:
    spec = StreamSpec.from_dict(_read_json(Path(args.spec)))
    stream = generate_stream(spec)
    out = Path(args.out) if args.out else _default_out() / f"{stream.dataset_id}.csv"
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_csv_stream(stream, out)
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc}") from None
    print(f"{out} labeled_prefix={len(stream.initial_y)} batch_size={spec.batch_size}")
    return EXIT_OK


def cmd_run(args) -> int:
    config = AlgorithmConfig(args.algo, _parse_sets(args.set), args.seed)
    stream = _single_dataset(args)
    result = run_stream(config, stream)
    out = Path(args.out) if args.out else _default_out() / f"{args.algo}__{stream.dataset_id}.json"
    _write_json(out, result.to_record())
    print(f"{args.algo} {stream.dataset_id} accuracy={result.average_accuracy:.4f} "
          f"seconds={result.wall_seconds:.3f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise UsageError(f"unknown algorithm {a!r}; expected one of {', '.join(ALGORITHMS)}")
    streams = [_load_dataset(p, args) for p in args.dataset]
    results = []
    for stream in streams:
        for a in algos:
            # timed runs are strictly sequential
            results.append(run_stream(AlgorithmConfig(a, {}, args.seed), stream))
    out = Path(args.out) if args.out else _default_out()
    _write_json(out / "results.json", [r.to_record() for r in results])
    bundle = build_bundle(results, out)
    render_report(bundle)
    if "accuracy" in bundle.rank_tables:
        t = bundle.rank_tables["accuracy"]
        for a in t.algorithms:
            print(f"{a}: average rank {t.average[a]:.4f}")
    return EXIT_OK


def _sweep_values(text: str) -> list:
    vals = [_parse_value(v.strip()) for v in text.split(",") if v.strip()]
    if not vals or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
        raise UsageError(f"--values expects a comma-separated list of numbers, got {text!r}")
    return vals


def cmd_sweep(args) -> int:
    values = _sweep_values(args.values)
    config = AlgorithmConfig(args.algo, _parse_sets(args.set), args.seed)
    stream = _single_dataset(args)
    results = sensitivity_sweep(config, stream, args.param, values)
    param = PARAM_ALIASES.get(args.param, args.param)
    name = f"{args.algo}_{param}"
    out = Path(args.out) if args.out else _default_out()
    render_report(build_bundle([], out, {name: (param, results)}))
    sys.stdout.write(sweep_markdown(name, param, results))
    return EXIT_OK


def cmd_report(args) -> int:
    records = []
    for p in args.results:
        doc = _read_json(Path(p))
        records.extend(doc if isinstance(doc, list) else [doc])
    try:
        results = [RunResult.from_record(r) for r in records]
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed result record: {exc}") from None
    out = Path(args.out) if args.out else _default_out()
    paths = render_report(build_bundle(results, out))
    print(f"wrote {len(paths)} files to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evlbench", description="Extreme-verification-latency stream benchmark.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("generate", help="StreamSpec JSON -> stream CSV")
    p.add_argument("--spec", required=True, metavar="JSON")
    p.add_argument("--out", metavar="CSV")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="one algorithm on one stream -> RunResult JSON")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    _dataset_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="algorithm parameter override")
    p.add_argument("--out", metavar="JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="algorithms x datasets -> results, rank tables and plots")
    p.add_argument("--algos", default=",".join(ALGORITHMS), help="comma-separated algorithm ids")
    _dataset_args(p, multiple=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="parameter sensitivity table for one algorithm")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated values, e.g. 2,3,4")
    _dataset_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render RunResult JSON files to CSV/Markdown/SVG")
    p.add_argument("--results", nargs="+", required=True, metavar="JSON")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_report)
    return parser


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        msg = str(exc)
        if not msg.startswith("usage:"):
            msg = f"{parser.format_usage()}evlbench: error: {msg}"
        print(msg, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (DataError, StreamError, ReportError, FileNotFoundError) as exc:
        print(f"evlbench: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"evlbench: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
