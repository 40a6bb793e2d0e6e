import json

import pytest

from evlbench.cli import OUT_ENV, cli_dispatch
from evlbench.streams import StreamSpec


@pytest.fixture()
def spec_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(StreamSpec(total_instances=900, batch_size=150, seed=3, class_overlap=0.3).to_json())
    return p


def _strip_wall(path):
    doc = json.loads(path.read_text())
    doc.pop("wall_seconds")
    return doc


def test_run_twice_identical_except_wall(spec_file, tmp_path):
    for name in ("a.json", "b.json"):
        argv = ["run", "--algo", "fast-compose", "--spec", str(spec_file), "--seed", "7", "--out", str(tmp_path / name)]
        assert cli_dispatch(argv) == 0
    a, b = (tmp_path / "a.json").read_text(), (tmp_path / "b.json").read_text()
    strip = lambda text: [line for line in text.splitlines() if '"wall_seconds"' not in line]
    assert strip(a) == strip(b)
    assert _strip_wall(tmp_path / "a.json") == _strip_wall(tmp_path / "b.json")


def test_generate_then_run_csv(spec_file, tmp_path, capsys):
    csv_path = tmp_path / "s.csv"
    assert cli_dispatch(["generate", "--spec", str(spec_file), "--out", str(csv_path)]) == 0
    out = tmp_path / "r.json"
    argv = ["run", "--algo", "scargc", "--data", str(csv_path), "--labeled", "150", "--batch-size", "150", "--out", str(out)]
    assert cli_dispatch(argv) == 0
    doc = json.loads(out.read_text())
    assert doc["dataset_ref"].startswith("sha256:")
    assert len(doc["per_batch_accuracy"]) == 6


def test_csv_with_header_flag(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b,y\n" + "\n".join(f"{i % 2},{i % 2},{i % 2}" for i in range(12)) + "\n")
    base = ["run", "--algo", "fast-compose", "--data", str(p), "--labeled", "4", "--batch-size", "4", "--out", str(tmp_path / "r.json")]
    assert cli_dispatch(base) == 2
    assert cli_dispatch(base + ["--header"]) == 0


def test_bench_missing_dataset_exit_2(spec_file, tmp_path, capsys):
    missing = tmp_path / "absent.csv"
    argv = ["bench", "--algos", "fast-compose", "--dataset", str(spec_file), "--dataset", str(missing),
            "--labeled", "10", "--batch-size", "10", "--out", str(tmp_path / "b")]
    assert cli_dispatch(argv) == 2
    assert str(missing) in capsys.readouterr().err


def test_bench_writes_tables(spec_file, tmp_path):
    out = tmp_path / "b"
    assert cli_dispatch(["bench", "--algos", "fast-compose,scargc", "--dataset", str(spec_file), "--out", str(out)]) == 0
    assert (out / "tables.md").exists()
    assert len(json.loads((out / "results.json").read_text())) == 2


def test_sweep_three_rows(spec_file, tmp_path, capsys):
    out = tmp_path / "sw"
    argv = ["sweep", "--algo", "scargc", "--param", "k", "--values", "2,3,4", "--spec", str(spec_file), "--out", str(out)]
    assert cli_dispatch(argv) == 0
    rows = (out / "sweep_scargc_k.csv").read_text().strip().splitlines()[1:]
    assert len(rows) == 3
    md_rows = [l for l in capsys.readouterr().out.splitlines() if l.startswith("| ") and "SCARGC" in l]
    assert len(md_rows) == 3


def test_report_from_results(spec_file, tmp_path):
    r = tmp_path / "r.json"
    assert cli_dispatch(["run", "--algo", "mclassification", "--spec", str(spec_file), "--out", str(r)]) == 0
    out = tmp_path / "rep"
    assert cli_dispatch(["report", "--results", str(r), "--out", str(out)]) == 0
    assert (out / "results.csv").exists()
    assert len(list((out / "plots").glob("*.svg"))) == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["run", "--algo", "nope", "--spec", "x.json"],
        ["run", "--algo", "scargc", "--spec", "x.json", "--bogus"],
        ["sweep", "--algo", "scargc", "--param", "k", "--values", "a,b", "--spec", "x.json"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert cli_dispatch(argv) == 1
    assert "usage:" in capsys.readouterr().err


def test_unknown_subcommand_prints_usage(capsys):
    assert cli_dispatch(["frobnicate"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_unknown_param_is_usage_error(spec_file):
    assert cli_dispatch(["run", "--algo", "scargc", "--spec", str(spec_file), "--set", "r=0.1"]) == 1


def test_bad_spec_is_data_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"family": "translating-gaussians"}')
    assert cli_dispatch(["run", "--algo", "scargc", "--spec", str(p)]) == 2


def test_help_exits_zero(capsys):
    assert cli_dispatch(["--help"]) == 0


def test_env_var_output_dir(spec_file, tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "envout"))
    assert cli_dispatch(["run", "--algo", "fast-compose", "--spec", str(spec_file)]) == 0
    assert len(list((tmp_path / "envout").glob("*.json"))) == 1
