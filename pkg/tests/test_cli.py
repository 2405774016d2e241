import csv
import io
import json
import subprocess
import sys

import pytest

from jain_durrmeyer.cli import (EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main,
                                parse_beta, parse_int_list, parse_x_list)
from fractions import Fraction


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


# ---------------------------------------------------------------- parsing helpers

def test_parse_beta():
    assert parse_beta("1/2") == Fraction(1, 2)
    assert parse_beta("0") == Fraction(0)
    assert parse_beta("0.25") == 0.25 and isinstance(parse_beta("0.25"), float)


def test_parse_lists():
    assert parse_int_list("3") == [3]
    assert parse_int_list("1,4,9") == [1, 4, 9]
    assert parse_int_list("2:5") == [2, 3, 4, 5]
    assert parse_x_list("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_x_list("0.5,2") == [0.5, 2.0]


# ---------------------------------------------------------------- documented examples

def test_moments_exact_fraction(capsys):
    code, doc, _ = run_json(capsys, "moments", "--n", "1", "--beta", "1/2", "--k", "2", "--r", "1",
                            "--method", "stirling-sum", "--exact")
    assert code == EXIT_OK
    assert doc["rows"][0]["exact"] == "8/3"
    assert doc["rows"][0]["ratio"] == pytest.approx(8 / 3, rel=1e-15)
    assert '"8/3"' in json.dumps(doc)


def test_paper_check_t2(capsys):
    code, doc, _ = run_json(capsys, "paper-check", "--family", "T", "--n", "10", "--beta", "0",
                            "--x", "1", "--r", "2")
    assert code == EXIT_OK
    (row,) = doc["rows"]
    assert row["closed"] == pytest.approx(1.42, abs=1e-12)
    assert row["abs_gap"] <= 1e-8


def test_eval_jain(capsys):
    code, doc, _ = run_json(capsys, "eval", "--f", "t", "--n", "5", "--beta", "0.3", "--x", "2",
                            "--operator", "jain")
    assert code == EXIT_OK
    assert doc["rows"][0]["value"] == pytest.approx(2.857143, abs=1e-6)


# ---------------------------------------------------------------- exit codes

@pytest.mark.parametrize("argv", [
    ["moments", "--n", "0"],
    ["moments", "--beta", "1"],
    ["moments", "--beta", "0.5", "--exact"],
    ["moments", "--method", "quadrature", "--beta", "1/2", "--exact"],
    ["moments", "--method", "nonsense"],
    ["eval", "--x", "1"],
    ["eval", "--f", "2*t + -", "--x", "1"],
    ["eval", "--f", "foo(t)", "--x", "1"],
    ["eval", "--f", "t", "--x", "-1"],
    ["korovkin", "--interval", "2,1"],
    ["nonexistent-command"],
])
def test_config_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == EXIT_CONFIG
    assert capsys.readouterr().err


def test_syntax_error_reports_offset(capsys):
    code, _, err = run(capsys, "eval", "--f", "2*t + -", "--x", "1")
    assert code == EXIT_CONFIG
    assert "offset 7" in err


def test_numeric_failure_exit_3_with_partial_output(capsys):
    code, doc, err = run_json(capsys, "eval", "--f", "1/t", "--x", "0,1", "--n", "5")
    assert code == EXIT_NUMERIC
    assert doc["meta"]["partial"] is True
    assert doc["meta"]["errors"]
    assert err


def test_saturation_exit_3(capsys):
    code, doc, _ = run_json(capsys, "basis", "--n", "1", "--beta", "0.9", "--x", "5",
                            "--hard-cap", "20")
    assert code == EXIT_NUMERIC
    assert doc["rows"]
    assert any("Saturation" in e for e in doc["meta"]["errors"])


def test_failed_check_exit_1(capsys):
    code, doc, _ = run_json(capsys, "voronovskaja", "--f", "e2", "--beta", "0.5", "--x", "1",
                            "--n-list", "10,20", "--limit-tol", "1e-12")
    assert code == EXIT_CHECK_FAILED
    assert doc["meta"]["passed"] is False


# ---------------------------------------------------------------- every subcommand runs

@pytest.mark.parametrize("argv", [
    ["basis", "--n", "5", "--beta", "0.25", "--x", "1,2"],
    ["moments", "--n", "3", "--beta", "0.4", "--k", "0:3", "--r", "0:4", "--method", "recurrence"],
    ["moments", "--n", "3", "--beta", "0.4", "--k", "2", "--r", "3", "--method", "quadrature"],
    ["paper-check", "--family", "S", "--family", "P", "--n", "2", "--beta", "1/4", "--k", "1,3"],
    ["eval", "--f", "abs_kink:1.5", "--operator", "auxiliary", "--x", "0:3:4"],
    ["voronovskaja", "--f", "e1", "--beta", "0.5", "--x", "1", "--n-list", "10,20,40"],
    ["korovkin", "--beta", "0.25", "--n-list", "10,20,40", "--interval", "0,1", "--points", "11"],
    ["bound-check", "--f", "abs_kink", "--n", "20", "--beta", "0", "--grid-step", "0.5"],
    ["order-check", "--beta", "0.5", "--x", "1", "--r", "1,2"],
])
def test_subcommands_ok(capsys, argv):
    code, doc, _ = run_json(capsys, *argv)
    assert code == EXIT_OK, doc["meta"]
    assert doc["meta"]["command"] == argv[0]
    assert doc["rows"]


# ---------------------------------------------------------------- CSV and determinism

HEADERS = {
    "basis": "x,k,value,cumulative_mass",
    "moments": "n,beta,k,r,method,ratio,exact,abs_error_bound,basis_moment",
    "paper-check": "family,order,n,beta,point,exact,exact_error_bound,closed,abs_gap,rel_gap",
    "eval": "operator,f,n,beta,x,value,error_estimate",
    "korovkin": "n,e0,e1,e2",
}


@pytest.mark.parametrize("command,extra", [
    ("basis", ["--x", "1"]),
    ("moments", ["--k", "2", "--r", "1"]),
    ("paper-check", ["--family", "T", "--r", "1", "--x", "1"]),
    ("eval", ["--f", "exp_decay"]),
    ("korovkin", ["--n-list", "10,20", "--points", "5"]),
])
def test_csv_header_stable(capsys, command, extra):
    code, out, _ = run(capsys, command, "--format", "csv", *extra)
    assert code in (EXIT_OK, EXIT_CHECK_FAILED)
    assert out.split("\n", 1)[0] == HEADERS[command]
    assert "\r" not in out
    rows = list(csv.reader(io.StringIO(out)))
    assert all(len(r) == len(rows[0]) for r in rows)


def test_csv_renders_fractions_and_17_digits(capsys):
    code, out, _ = run(capsys, "moments", "--n", "1", "--beta", "1/2", "--k", "2", "--r", "1",
                       "--exact", "--format", "csv")
    assert code == EXIT_OK
    row = out.splitlines()[1].split(",")
    assert row[1] == "1/2"
    assert row[6] == "8/3"
    assert row[5] == format(8 / 3, ".17g")


@pytest.mark.parametrize("argv", [
    ["paper-check", "--family", "T", "--n", "10,20", "--beta", "1/2", "--x", "0.5,1"],
    ["eval", "--f", "sin(t)/(1+t)", "--n", "8", "--beta", "0.3", "--x", "0:2:5"],
    ["moments", "--n", "2", "--beta", "1/3", "--k", "0:4", "--r", "0:3", "--exact"],
])
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_byte_identical_runs(tmp_path, argv, fmt):
    outputs = []
    for i in range(2):
        path = tmp_path / f"run{i}.{fmt}"
        assert main(argv + ["--format", fmt, "--output", str(path)]) == EXIT_OK
        outputs.append(path.read_bytes())
        if fmt == "csv":
            outputs.append((tmp_path / f"run{i}.{fmt}.meta.json").read_bytes())
    half = len(outputs) // 2
    assert outputs[:half] == outputs[half:]


def test_byte_identical_across_processes(tmp_path):
    argv = ["eval", "--f", "exp_decay", "--n", "6", "--beta", "0.25", "--x", "0:3:4"]
    files = []
    for i in range(2):
        path = tmp_path / f"p{i}.json"
        subprocess.run([sys.executable, "-m", "jain_durrmeyer", *argv, "--output", str(path)],
                       check=True)
        files.append(path.read_bytes())
    assert files[0] == files[1]


def test_timing_goes_to_stderr_only(capsys):
    code, out, err = run(capsys, "moments", "--timing")
    assert code == EXIT_OK
    assert "elapsed" in err and "elapsed" not in out


def test_json_meta_echoes_config(capsys):
    _, doc, _ = run_json(capsys, "moments", "--beta", "1/3", "--exact")
    assert doc["meta"]["config"]["beta"] == "1/3"
    assert list(doc["meta"]["config"]) == sorted(doc["meta"]["config"])
    assert set(doc["meta"]["versions"]) == {"jain_durrmeyer", "numpy", "scipy"}
