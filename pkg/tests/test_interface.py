"""Config ingestion, report serialization, CLI exit codes, determinism."""

import csv
import io
import json

import pytest

from finslercheck import cli
from finslercheck.config import build_config, parse_config_file
from finslercheck.errors import ConfigError
from finslercheck.reporting import dumps


def _strip_timestamp(text):
    return "\n".join(l for l in text.splitlines() if "generated_at" not in l)


def test_config_file_round_trip(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(
        "# finslercheck configuration\n"
        "[check-parallel]\n"
        "metric = funk_parallel\n"
        "a = 0.5, 0.1, 0\n"
        "c = 1\n"
        "cmu = 0, 0.2\n"
        "samples = 30   # inline comment\n"
        "seed = 7\n"
        "\n"
        "[scan]\n"
        "metric = general_berwald\n"
        "a = 0.1,0.05,0\n")
    sections = parse_config_file(str(p))
    assert sections["check-parallel"]["metric"] == "funk_parallel"
    assert sections["check-parallel"]["a"] == (0.5, 0.1, 0.0)
    assert sections["check-parallel"]["samples"] == 30
    assert sections["scan"]["a"] == (0.1, 0.05, 0.0)


@pytest.mark.parametrize("body,fragment", [
    ("[nope]\nmetric = klein\n", "unknown section"),
    ("[scan]\nbogus = 1\n", "unknown configuration key"),
    ("[scan]\nsamples = many\n", "bad value"),
    ("metric = klein\n", "outside of a"),
    ("[scan]\njust a line\n", "expected 'key = value'"),
])
def test_config_file_errors(tmp_path, body, fragment):
    p = tmp_path / "bad.cfg"
    p.write_text(body)
    with pytest.raises(ConfigError) as err:
        parse_config_file(str(p))
    assert fragment in str(err.value)


def test_build_config_validation():
    with pytest.raises(ConfigError):
        build_config("scan", overrides={"samples": 5})
    with pytest.raises(ConfigError):
        build_config("scan", overrides={"scheme": "magic"})
    with pytest.raises(ConfigError):
        build_config("scan", overrides={"dim": 1})
    cfg = build_config("scan", overrides={"samples": "25", "dim": "4"})
    assert cfg.samples == 25 and cfg.dim == 4


def test_cli_pass_exit_zero(capsys):
    rc = cli.main(["scalar-curvature", "--metric", "klein",
                   "--samples", "15", "--seed", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "ScalarCurvature" in out


def test_cli_fail_exit_one(capsys):
    rc = cli.main(["check-parallel", "--metric", "euclidean",
                   "--form", "x1,x2,x3", "--samples", "12", "--seed", "1"])
    assert rc == 1
    assert "NotParallel" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["scan", "--metric", "nope"],
    ["scan", "--metric", "klein", "--radius", "1.5"],
    ["check-parallel", "--metric", "klein", "--samples", "12"],  # no family
    ["sphsym", "--phi", "sqrt("],
    ["scan", "--metric", "klein", "--samples", "3"],
])
def test_cli_config_errors_exit_two(argv, capsys):
    assert cli.main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_cli_domain_error_exit_three(capsys):
    rc = cli.main(["sphsym", "--phi", "log(s-10)", "--samples", "10"])
    assert rc == 3
    assert "domain error" in capsys.readouterr().err


def test_cli_writes_report_and_determinism(tmp_path):
    # identical config (including the output path) and seed, run twice
    out = tmp_path / "r.json"
    argv = ["check-parallel", "--metric", "funk_parallel",
            "--a", "0.5,0.1,0", "--c", "1", "--cmu", "0,0.2",
            "--samples", "20", "--seed", "7", "--out", str(out)]
    assert cli.main(argv) == 0
    t1 = out.read_text()
    assert cli.main(argv) == 0
    t2 = out.read_text()
    assert _strip_timestamp(t1) == _strip_timestamp(t2)
    payload = json.loads(t1)
    assert payload["schema"] == 1
    assert payload["pass"] is True
    assert payload["config"]["seed"] == 7
    assert payload["checks"][0]["name"] == "max_covariant_derivative"


def test_csv_and_json_same_records(tmp_path):
    outj = tmp_path / "r.json"
    outc = tmp_path / "r.csv"
    base = ["scalar-curvature", "--metric", "klein", "--samples", "12",
            "--seed", "2"]
    assert cli.main(base + ["--out", str(outj), "--format", "json"]) == 0
    assert cli.main(base + ["--out", str(outc), "--format", "csv"]) == 0
    jchecks = json.loads(outj.read_text())["checks"]
    rows = list(csv.DictReader(io.StringIO(outc.read_text())))
    assert len(rows) == len(jchecks)
    for row, chk in zip(rows, jchecks):
        assert row["name"] == chk["name"]
        assert row["pass"] == str(chk["pass"]).lower()
        assert int(row["sample_count"]) == chk["sample_count"]
        if chk["max_residual"] is None:
            assert row["max_residual"] == ""
        else:
            assert float(row["max_residual"]) == pytest.approx(
                chk["max_residual"], rel=1e-15)
        assert json.loads(row["notes"]) == chk["notes"]


def test_json_17_digit_floats():
    text = dumps({"v": 0.1234567890123456789, "n": None, "t": True})
    assert '"v": 0.12345678901234568' in text
    assert json.loads(text)["t"] is True


def test_config_file_through_cli(tmp_path, capsys):
    p = tmp_path / "run.cfg"
    p.write_text("[scan]\nmetric = general_berwald\na = 0.1,0.05,0\n"
                 "x_points = 2\ny_samples = 8\nseed = 11\n")
    rc = cli.main(["--config", str(p), "scan"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "branch: pointwise" in out
    # CLI flag overrides the file value
    rc = cli.main(["--config", str(p), "scan", "--y-samples", "9"])
    assert rc == 0


def test_tensors_command(tmp_path):
    out = tmp_path / "t.json"
    rc = cli.main(["tensors", "--metric", "klein", "--samples", "10",
                   "--seed", "4", "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert len(payload["data"]["samples"]) == 10
    rec = payload["data"]["samples"][0]
    assert set(rec) >= {"x", "y", "energy", "metric", "spray",
                        "nonlinear_connection", "berwald_curvature",
                        "jacobi", "curvature_R"}


def test_invariants_command(capsys):
    rc = cli.main(["invariants", "--metric", "funk_parallel",
                   "--a", "0.5,0.1,0", "--samples", "10", "--seed", "6"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "euler_chain" in out and "closed_form_spray" in out


def test_sphsym_sweep_csv(tmp_path):
    sweep = tmp_path / "sweep.csv"
    rc = cli.main(["sphsym", "--phi", "berwald_classic", "--samples", "10",
                   "--grid-nr", "5", "--grid-ns", "5",
                   "--sweep", str(sweep)])
    assert rc == 0
    lines = sweep.read_text().splitlines()
    assert lines[0] == "r,s,P,Q,metrizability_res1,metrizability_res2"
    assert len(lines) == 26


def test_threads_match_sequential(tmp_path):
    argv = ["tensors", "--metric", "klein", "--samples", "10", "--seed", "4"]
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(argv + ["--out", str(out1)]) == 0
    assert cli.main(argv + ["--threads", "4", "--out", str(out2)]) == 0
    a = json.loads(out1.read_text())
    b = json.loads(out2.read_text())
    assert a["data"] == b["data"]
