import csv
import functools
import io
import json

import pytest

from aligator import pipeline
from aligator.cli import main
from aligator.invariants import invariant_ideal
from aligator.pipeline import verify_numeric

from conftest import CORPUS, SQUARES, SQUARES_INVARIANT


def _analyze(tmp_path, capsys, source, *flags):
    path = tmp_path / "loop.txt"
    path.write_text(source)
    code = main(["analyze", str(path), *flags])
    return code, capsys.readouterr().out


def test_squares_text(tmp_path, capsys):
    code, out = _analyze(tmp_path, capsys, SQUARES)
    assert code == 0
    assert SQUARES_INVARIANT in out
    assert "closed forms, path 1:" in out


def test_squares_json_schema(tmp_path, capsys):
    code, out = _analyze(tmp_path, capsys, SQUARES, "--format", "json", "--verify")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"variables", "initial_variables", "paths", "closed_forms",
                         "invariant_basis", "trivial_ideal", "diagnostics", "timings_ms",
                         "verification"}
    assert data["variables"] == ["r", "v", "u"]
    assert data["initial_variables"] == ["r_0", "v_0", "u_0"]
    assert data["paths"] == 2 and len(data["closed_forms"]) == 2
    assert data["invariant_basis"] == [SQUARES_INVARIANT]
    assert data["verification"]["passed"] is True
    assert set(data["timings_ms"]) >= set(pipeline.PHASES)


def test_json_is_deterministic(tmp_path, capsys):
    outs = {_analyze(tmp_path, capsys, SQUARES, "--format", "json", "--no-timings")[1]
            for _ in range(3)}
    assert len(outs) == 1


def test_zero_ideal_marker(tmp_path, capsys):
    code, out = _analyze(tmp_path, capsys, "while true x = x + 1 end", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["trivial_ideal"] is True and data["invariant_basis"] == []
    code, out = _analyze(tmp_path, capsys, "while true x = x + 1 end")
    assert "zero ideal" in out


def test_identity_loop(tmp_path, capsys):
    code, out = _analyze(tmp_path, capsys, "while true x = x end", "--format", "json")
    # same term order as the squares loop output, where initial values print first
    assert code == 0 and json.loads(out)["invariant_basis"] == ["x_0-x"]


@pytest.mark.parametrize("source, code, diag", [
    ("while true x = = 1 end", 1, "SyntaxError"),
    ("while true x = x/y end", 2, "DivisionByVariable"),
    ("while true x = x*y end", 2, "UnsupportedUpdate"),
    ("while true tmp = x; x = y; y = 2*tmp end", 2, "IrrationalRoots"),
])
def test_error_exit_codes(tmp_path, capsys, source, code, diag):
    got, out = _analyze(tmp_path, capsys, source, "--format", "json")
    assert got == code
    assert json.loads(out)["diagnostics"][0]["code"] == diag


def test_timeout_exit_code(tmp_path, capsys):
    source = (CORPUS / "knuth.loop").read_text()
    code, out = _analyze(tmp_path, capsys, source, "--format", "json", "--timeout", "0.5")
    assert code == 3
    assert json.loads(out)["diagnostics"][0]["code"] == "Timeout"


def test_nontermination_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(pipeline, "invariant_ideal",
                        functools.partial(invariant_ideal, max_rounds=1))
    code, out = _analyze(tmp_path, capsys, SQUARES, "--format", "json")
    assert code == 4
    assert json.loads(out)["diagnostics"][0]["code"] == "NonTermination"


def test_verify_failure_exit_code(tmp_path, capsys, monkeypatch):
    real = pipeline.verify_numeric
    corrupt = lambda ast, basis, *a: real(ast, [g + 1 for g in basis], *a)
    monkeypatch.setattr(pipeline, "verify_numeric", corrupt)
    code, out = _analyze(tmp_path, capsys, SQUARES, "--format", "json", "--verify")
    assert code == 5
    assert json.loads(out)["verification"]["passed"] is False


def test_missing_file(capsys):
    assert main(["analyze", "/nonexistent/loop"]) == 2


# --- numeric verification -----------------------------------------------------------


def test_corrupted_polynomial_fails_at_step_zero():
    res = verify_numeric(SQUARES, [SQUARES_INVARIANT + "+1"], trials=5)
    assert not res.passed
    assert res.counterexample["step"] == 0 and res.counterexample["trial"] == 0


def test_empty_basis_passes():
    assert verify_numeric(SQUARES, []).passed


def test_true_invariant_passes():
    assert verify_numeric(SQUARES, [SQUARES_INVARIANT], trials=100, max_steps=30).passed


# --- bench ------------------------------------------------------------------------


def test_bench_empty_dir(tmp_path, capsys):
    assert main(["bench", str(tmp_path)]) == 0
    assert capsys.readouterr().out.startswith("instance")


def _small_corpus(tmp_path):
    for name in ("petter1", "cohencu", "freire1"):
        (tmp_path / f"{name}.loop").write_text((CORPUS / f"{name}.loop").read_text())
    (tmp_path / "bad.loop").write_text("while true x = x*y end")


def test_bench_formats(tmp_path, capsys):
    _small_corpus(tmp_path)
    assert main(["bench", str(tmp_path), "--format", "json"]) == 5
    rows = json.loads(capsys.readouterr().out)
    assert [r["name"] for r in rows] == ["bad", "cohencu", "freire1", "petter1"]
    assert rows[0]["status"] == "UnsupportedUpdate" and rows[0]["exit_code"] == 2
    assert all(r["status"] == "ok" and r["nonempty"] and r["verified"] for r in rows[1:])

    main(["bench", str(tmp_path), "--format", "csv", "--no-verify"])
    table = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(table) == 4 and table[1]["verified"] == ""

    main(["bench", str(tmp_path)])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[:2] == ["instance", "status"] and len(lines) == 5
