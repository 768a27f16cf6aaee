import json

import pytest

from sphere_lab import suites
from sphere_lab.cli import main, parse_lambda_range
from sphere_lab.errors import UsageError


def test_parse_lambda_range():
    assert parse_lambda_range("1:5") == [1, 2, 3, 4, 5]
    assert parse_lambda_range("1:9:odd") == [1, 3, 5, 7, 9]
    assert parse_lambda_range("1:9:even") == [2, 4, 6, 8]
    for bad in ("5:1", "1", "1:2:3:4", "a:b", "1:5:prime"):
        with pytest.raises(UsageError):
            parse_lambda_range(bad)


def test_energy_single(capsys):
    code = main(["energy", "--dim", "4", "--lambda", "25"])
    assert code == 0
    body = json.loads(capsys.readouterr().out)
    assert body["energy"] == 505176


def test_energy_range_csv(capsys):
    code = main(["energy", "--dim", "4", "--lambda-range", "1:3", "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split(",")[:2] == ["n", "lambda"]
    assert len(lines) == 4


def test_enumerate_out_file(tmp_path, capsys):
    out = tmp_path / "shell.json"
    code = main(["enumerate", "--dim", "4", "--lambda", "2", "--out", str(out)])
    assert code == 0
    body = json.loads(out.read_text())
    assert body["size"] == 24


def test_gram_count(capsys):
    code = main(["gram-count", "--lambda", "5", "--a", "1", "--b", "2"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["count"] == 384


def test_density_r_max(capsys):
    # obstruction target: nu_3 drops to 0 at depth 2 and stays there
    code = main([
        "density", "--lambda", "5", "--a", "-2", "--b", "1", "--p", "3",
        "--r-max", "3",
    ])
    assert code == 0
    body = json.loads(capsys.readouterr().out)
    assert body["stabilized"] is True
    assert body["nu"] == "0"


def test_moments(capsys):
    code = main(["moments", "--lambda", "1", "--p", "4"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["value_exact"] == 168


def test_fit_rows(capsys):
    code = main(["fit", "--rows", "1,1;2,16;3,81;4,256"])
    assert code == 0
    body = json.loads(capsys.readouterr().out)
    assert abs(body["slope"] - 4.0) < 1e-9


def test_fit_infile(tmp_path, capsys):
    path = tmp_path / "rows.csv"
    path.write_text("x,y\n1,2\n2,8\n3,18\n4,32\n")
    code = main(["fit", "--in", str(path)])
    assert code == 0
    body = json.loads(capsys.readouterr().out)
    assert abs(body["slope"] - 2.0) < 1e-9


def test_incidence_pass_exit_zero(capsys):
    code = main(["incidence", "--dim", "4", "--lambda", "25"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["satisfied"] is True


def test_suite_failure_exit_one(monkeypatch, capsys):
    fake = suites.SuiteResult(name="zz-fake", passed=False, elapsed=0.0, details={})
    monkeypatch.setitem(suites.CRITERIA, "zz-fake", lambda: fake)
    code = main(["suite", "--name", "zz-fake"])
    assert code == 1
    assert "FAIL zz-fake" in capsys.readouterr().out


def test_suite_pass_exit_zero(capsys):
    code = main(["suite", "--name", "03-chain-counts"])
    assert code == 0
    assert "PASS 03-chain-counts" in capsys.readouterr().out


def test_usage_errors_exit_two(capsys):
    assert main(["energy"]) == 2  # no lambda
    assert main(["energy", "--lambda-range", "9:1"]) == 2
    assert main(["energy", "--dim", "9", "--lambda", "1"]) == 2  # service-side 422
    assert main(["bogus"]) == 2  # argparse
    assert main([]) == 2


def test_paraboloid_range(capsys):
    code = main(["paraboloid", "--lambda-range", "1:3", "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("N,")
    assert len(lines) == 4
