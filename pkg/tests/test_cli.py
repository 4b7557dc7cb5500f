import json
from pathlib import Path

import pytest

from hypercf.cli import cmd_gen, main, matrix_document, dump, parse_system_document
from hypercf.pipeline import matrix_hash
from hypercf.system import build_H

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_demo_reduce(capsys):
    code, out, _ = run(capsys, "reduce", "--demo", "strings")
    assert code == 0
    assert out == (GOLDEN / "demo_strings.txt").read_text()
    code, out2, _ = run(capsys, "demo", "strings")
    assert code == 0 and out2 == out


def test_demo_check(capsys):
    code, out, _ = run(capsys, "demo", "strings", "--check")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 6 and all(l.startswith("PASS") for l in lines)


@pytest.mark.parametrize("target", ["qstar", "L", "Hhat"])
def test_fault_injection_exit(capsys, target):
    code, out, err = run(capsys, "check", "--demo", "strings", "--inject-fault", target)
    assert code == 3
    assert "FAIL" in out and "fault injected" in err


def test_no_reduce(capsys):
    code, _, err = run(capsys, "reduce", "--demo", "strings", "--no-reduce")
    assert code == 2 and "NotReducible" in err


def test_uncontrollable_document(tmp_path, capsys):
    doc = {"system": {"F": [[1, 0], [0, 1]], "B": [[1], [1]], "Q0": [[1]], "Q1": [[1]],
                      "C": [[0, 0]], "tau_minus": ["1"], "tau_plus": ["2"]}}
    p = tmp_path / "sys.json"
    p.write_text(json.dumps(doc))
    code, _, err = run(capsys, "reduce", str(p))
    assert code == 1 and "NotControllable" in err


@pytest.mark.parametrize("text", ["{", "[]", '{"system": {}}', '{"H": {"shape": [1, 1], "entries": [[0, 0, "x", [1]]]}}'])
def test_schema_errors(tmp_path, capsys, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    code, _, err = run(capsys, "reduce", str(p))
    assert code == 1 and "error" in err


def test_missing_file(capsys):
    code, _, _ = run(capsys, "reduce", "/nonexistent/doc.json")
    assert code == 1


def test_gen_golden_and_deterministic(capsys):
    assert cmd_gen(0) == (GOLDEN / "gen_seed0.json").read_text()
    code, out, _ = run(capsys, "gen", "--seed", "0")
    assert code == 0 and out == cmd_gen(0)
    assert cmd_gen(7, 3, 2) == cmd_gen(7, 3, 2)


def test_gen_scalar():
    _, sys_, _ = parse_system_document(cmd_gen(4, 1, 1))
    assert (sys_.n, sys_.n_minus, sys_.n_plus) == (1, 1, 1)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_generated_document_checks(tmp_path, capsys, seed):
    p = tmp_path / "g.json"
    p.write_text(cmd_gen(seed))
    code, out, _ = run(capsys, "check", str(p))
    assert code == 0 and "FAIL" not in out


def test_cross_mode_hash(tmp_path, capsys):
    text_a = cmd_gen(3)
    _, sys_, _ = parse_system_document(text_a)
    _, H, _ = parse_system_document(cmd_gen(3, mode="b"))
    assert matrix_hash(H) == matrix_hash(build_H(sys_))
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pa.write_text(text_a)
    pb.write_text(dump(matrix_document(build_H(sys_))))
    _, ra, _ = run(capsys, "reduce", str(pa), "--format", "json")
    _, rb, _ = run(capsys, "reduce", str(pb), "--format", "json")
    assert json.loads(ra)["input_hash"] == json.loads(rb)["input_hash"]


def test_json_and_latex_formats(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "reduce", "--demo", "strings", "--format", "json", "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["classification"] == "quasi"
    code, tex, _ = run(capsys, "reduce", "--demo", "strings", "--format", "latex")
    assert code == 0 and r"\hat H" in tex


def test_options_override(capsys):
    code, _, err = run(capsys, "reduce", "--demo", "strings", "--passes", "0")
    assert code == 2 and "ReductionDiverged" in err
