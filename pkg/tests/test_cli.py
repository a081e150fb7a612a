from __future__ import annotations

import json
import subprocess
import sys

import pytest

from tatehh.cli import main
from tatehh.problem import CORPUS, ParseError, corpus_path, load, parse


def run_json(capsys, *argv) -> tuple[int, dict]:
    code = main([*argv, "--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


# --- parsing ---------------------------------------------------------------------

def test_corpus_entries_parse():
    for name in CORPUS:
        s = load(name)
        assert s.name == name
        assert corpus_path(name).exists()


def test_f2_is_ground_field():
    s = parse(str(corpus_path("f2")))
    assert s.algebra.dim == 1 and s.p == 2


def test_nonassociative_table_names_triple():
    raw = {"p": 2, "algebra": {"basis": ["1", "e", "f"], "unit": 0,
                               "mult": [["e", "e", [0, 0, 1]], ["f", "e", [0, 1, 0]]]}}
    with pytest.raises(ParseError) as err:
        parse(raw)
    assert any("associativity fails on (e, e, e)" in msg for msg in err.value.problems)


def test_non_prime_modulus():
    raw = {"p": 4, "algebra": {"basis": ["1"], "unit": 0}}
    with pytest.raises(ParseError, match="modulus not prime"):
        parse(raw)


def test_malformed_input():
    with pytest.raises(ParseError):
        parse("{not json")
    with pytest.raises(ParseError):
        parse({"p": 2})
    with pytest.raises(ParseError, match="unknown basis element"):
        parse({"p": 2, "algebra": {"basis": ["1"], "mult": [["x", "1", [1]]]}})


def test_inline_json_and_coefficient_reduction():
    s = parse('{"p": 3, "algebra": {"basis": ["1", "e"], "mult": [["e", "e", [0, 3]]]}}')
    assert s.algebra.mult[1, 1, 1] == 0


def test_explicit_module():
    raw = dict(load("f2eps").raw)
    raw["module"] = {"basis": ["k"], "left": [["eps", "k", [0]]], "right": [["k", "eps", [0]]]}
    s = parse(raw)
    assert s.module.dim == 1 and not s.module_is_regular


# --- commands ----------------------------------------------------------------------

def test_hh_f2eps(capsys):
    code, rep = run_json(capsys, "hh", "f2eps", "--max-degree", "4")
    assert code == 0
    assert rep["results"]["dims"] == {str(n): 2 for n in range(5)}


def test_hh_table_output(capsys):
    assert main(["hh", "m2f2", "-D", "2", "--verbose"]) == 0
    out = capsys.readouterr().out
    assert "H_0: [E11]" in out
    assert "digest:" in out


def test_degeneration_m2f2(capsys):
    code, rep = run_json(capsys, "degeneration", "m2f2", "-p", "2")
    assert code == 0
    assert rep["results"]["verdict"] == "match"


def test_strict_inconclusive_exit_code(capsys):
    assert main(["degeneration", "f2eps", "--strict"]) == 2
    capsys.readouterr()
    assert main(["degeneration", "f2eps"]) == 0


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"p": 4, "algebra": {"basis": ["1"]}}))
    assert main(["hh", str(bad)]) == 1
    assert "modulus not prime" in capsys.readouterr().err
    assert main(["hh", str(tmp_path / "missing.json")]) == 1


def test_wrong_group_order(capsys):
    assert main(["tate", "f2", "-p", "3"]) == 1


def test_tate_and_ss_commands(capsys):
    code, rep = run_json(capsys, "tate", "f3", "--window=-2..2")
    assert code == 0
    assert set(rep["results"]["dims"].values()) == {1}
    assert rep["parameters"]["margin"] == 2
    code, rep = run_json(capsys, "ss", "f2eps", "--window=-1..2")
    assert code == 0
    assert all(e == h for e, h in rep["results"]["convergence"].values())


def test_d1check_and_subdivision(capsys):
    code, rep = run_json(capsys, "d1check", "f2")
    assert code == 0 and rep["results"]["verdict"] == "trivial"
    code, rep = run_json(capsys, "subdivision-selftest", "f2eps", "-p", "2", "-D", "2")
    assert code == 0 and rep["status"] == "ok"


def test_json_digest_is_deterministic(capsys):
    _, a = run_json(capsys, "hh", "f2xf2", "-D", "3")
    _, b = run_json(capsys, "hh", "f2xf2", "-D", "3")
    assert a["digest"] == b["digest"]
    assert a["input_digest"] == b["input_digest"] != ""
    a.pop("seconds"); b.pop("seconds")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    _, c = run_json(capsys, "hh", "f2xf2", "-D", "2")
    assert c["digest"] != a["digest"]


def test_selftest_exit_zero(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tatehh", "hh", "f2", "-D", "1", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["dims"] == {"0": 1, "1": 0}
