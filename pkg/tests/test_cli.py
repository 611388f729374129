from __future__ import annotations

import csv
import json
import shutil
import subprocess
import sys

import pytest
from builders import denormalized_genus1

from knvertex.cli import (
    EXIT_FAIL,
    EXIT_OK,
    EXIT_PRECISION,
    EXIT_USAGE,
    UsageError,
    parse_index,
    parse_window,
    run,
)
from knvertex.surface import export_model


def run_json(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_window_parsing():
    assert parse_window("-3..3", 0) == (-6, 6)
    assert parse_window("-9/2..9/2", 1) == (-9, 9)
    assert parse_index("-3/2", 1) == -3
    assert parse_window("1/2..3", 0) == (2, 6)
    for bad, g in (("3..1", 0), ("a..b", 0), ("1", 0), ("1/4..1/3", 0)):
        with pytest.raises(UsageError):
            parse_window(bad, g)


def test_basis_genus0(capsys):
    code, data = run_json(capsys, "basis", "--genus", "0", "--lambda", "0", "--n", "3", "--prec", "5")
    assert code == EXIT_OK
    assert data["series"]["valuation"] == 3 and data["series"]["coeffs"] == ["1"]
    assert data["leading"] == {"exponent": 3, "value": "1"}


def test_basis_genus1_negative_index(capsys):
    code, data = run_json(capsys, "basis", "--genus", "1", "--lambda", "0", "--n", "-1/2", "--prec", "3",
                          "--point", "minus")
    assert code == EXIT_OK
    assert data["leading"]["exponent"] == -1


def test_gamma_csv_is_n_delta(tmp_path, capsys):
    out = tmp_path / "gamma.csv"
    code = run(["constants", "gamma", "--genus", "0", "--window", "-4..4", "--out", str(out)])
    assert code == EXIT_OK
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["twice_n", "twice_m", "value"]
    assert len(rows) == 1 + 9 * 9
    for tn, tm, val in rows[1:]:
        n, m = int(tn) // 2, int(tm) // 2
        assert int(val) == (n if n + m == 0 else 0)


def test_xi_json(capsys):
    code, data = run_json(capsys, "constants", "xi", "--genus", "0", "--window", "-2..2")
    assert code == EXIT_OK
    table = {(a, b): v for a, b, v in data["entries"]}
    assert table[(2, 0)] == "-1" and table[(-2, -4)] == "1"


def test_fock_dim(capsys):
    code, data = run_json(capsys, "fock", "dim", "--wmax", "8")
    assert code == EXIT_OK
    assert data["by_weight"] == [1, 1, 2, 3, 5, 7, 11, 15, 22]


def test_fock_apply(capsys):
    code, data = run_json(capsys, "fock", "apply", "--mode", "1", "--state", "A[-1]|0>")
    assert code == EXIT_OK
    assert data["result"] == "(1)*|0>"
    code, data = run_json(capsys, "fock", "apply", "--genus", "1", "--mode", "3/2", "--state",
                          "A[-1/2]A[-3/2]|0>")
    assert code == EXIT_OK
    assert "A[-3/2]|0>" in data["result"] and "A[-1/2]|0>" in data["result"]


def test_model_export_and_validate(tmp_path, capsys):
    path = tmp_path / "g1.json"
    assert run(["model", "export", "--genus", "1", "--window", "-9/2..9/2", "--prec", "6", "--out", str(path)]) == 0
    code, rep = run_json(capsys, "model", "validate", str(path), "--window", "-9/2..9/2")
    assert code == EXIT_OK and rep["result"] == "pass"


def test_validate_flags_denormalized(tmp_path, capsys, g1):
    bad = denormalized_genus1(g1)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(export_model(bad, -9, 9, 6)))
    code, rep = run_json(capsys, "model", "validate", str(path), "--window", "-9/2..9/2")
    assert code == EXIT_FAIL
    assert rep["duality"]["deviations"][0]["twice_n"] == -1


def test_precision_error_exit_code(tmp_path, capsys):
    path = tmp_path / "short.json"
    assert run(["model", "export", "--genus", "1", "--window", "-5/2..5/2", "--prec", "2", "--out", str(path)]) == 0
    code, data = run_json(capsys, "basis", "--model", str(path), "--lambda", "0", "--n", "-3/2", "--prec", "6")
    assert code == EXIT_PRECISION
    assert data["error"] == "insufficient precision"
    assert data["deficit"] == 4


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["basis", "--lambda", "0", "--n", "1/2", "--prec", "3"],
    ["fock", "apply", "--mode", "1", "--state", "A[-1]"],
    ["model", "validate", "/nonexistent/model.json", "--window", "-1..1"],
    ["check", "delta", "--orders", "x"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == EXIT_USAGE


def test_check_delta_genus0(capsys):
    code, data = run_json(capsys, "check", "delta", "--genus", "0")
    assert code == EXIT_OK and data["result"] == "pass"
    assert all(r["result"] == "pass" for r in data["reports"])


def test_check_axioms_genus0(capsys):
    code, data = run_json(capsys, "check", "axioms", "--genus", "0", "--wmax", "3")
    assert code == EXIT_OK
    kinds = {r["check"].split()[0].rstrip(":") for r in data["reports"]}
    assert {"vacuum", "locality", "sharpness"} <= kinds


def test_compare_genus0(capsys):
    code, data = run_json(capsys, "compare", "genus0", "--wmax", "3", "--range", "4")
    assert code == EXIT_OK and len(data["reports"]) == 6


@pytest.mark.skipif(shutil.which("kn") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["kn", "fock", "dim", "--wmax", "2"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["dim"] == 4


def test_module_entry():
    proc = subprocess.run([sys.executable, "-m", "knvertex.cli", "fock", "dim", "--wmax", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["dim"] == 2
