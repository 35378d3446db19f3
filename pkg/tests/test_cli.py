import dataclasses
import json
import subprocess
import sys

import pytest

from setreg import corpus
from setreg.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, main
from setreg.regmoduli import FAILS, HOLDS

LINEAR = {"schema_version": 1, "F": {"linear": {"A": [[2.0]], "lo": [-1], "hi": [1], "h": 0.0625}}}


def write(path, data):
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_input_mode_single_check(tmp_path, capsys):
    prob = write(tmp_path / "p.json", LINEAR)
    rep = tmp_path / "r.json"
    code, out, _ = run(["--input", prob, "--check", "subreg", "--point", "0,0", "--L", "1.0",
                        "--report", str(rep)], capsys)
    assert code == EXIT_OK
    # stdout carries only the report path
    assert out == f"{rep}\n"
    data = json.loads(rep.read_text())
    assert data["schema_version"] == 1 and data["mode"] == "input"
    (res,) = data["results"]
    assert res["check"] == "subreg" and res["report"]["verdict"] == HOLDS


def test_input_mode_several_checks_in_order(tmp_path, capsys):
    prob = write(tmp_path / "p.json", LINEAR)
    rep = tmp_path / "r.json"
    code, _, _ = run(["--input", prob, "--check", "estimate:subreg,triad:at2", "--check", "reg",
                      "--point", "0,0", "--report", str(rep)], capsys)
    assert code == EXIT_OK
    res = json.loads(rep.read_text())["results"]
    assert [r["check"] for r in res] == ["estimate:subreg", "triad:at2", "reg"]
    assert res[0]["report"]["estimate"] == pytest.approx(0.5)


@pytest.mark.parametrize("argv", [
    ["--check", "nope", "--point", "0,0"],
    ["--check", "subreg", "--point", "0,0.3"],
    ["--check", "subreg", "--point", "zero"],
    ["--check", "main_i", "--point", "0,0"],
    [],
])
def test_config_errors_write_nothing(tmp_path, capsys, argv):
    prob = write(tmp_path / "p.json", LINEAR)
    rep = tmp_path / "r.json"
    code, out, err = run(["--input", prob, *argv, "--report", str(rep)], capsys)
    assert code == EXIT_CONFIG and out == "" and err
    assert not rep.exists()


@pytest.mark.parametrize("content", [
    "{not json",
    {"schema_version": 2, "F": LINEAR["F"]},
    {"schema_version": 1, "F": {"linear": {"A": [[1.0]]}}},
    {"schema_version": 1, "extra": 1},
])
def test_input_errors_write_nothing(tmp_path, capsys, content):
    prob = write(tmp_path / "p.json", content)
    rep = tmp_path / "r.json"
    code, out, _ = run(["--input", prob, "--check", "subreg", "--point", "0,0",
                        "--report", str(rep)], capsys)
    assert code == EXIT_INPUT and out == ""
    assert not rep.exists()


def test_missing_input_file(tmp_path, capsys):
    code, _, _ = run(["--input", str(tmp_path / "none.json"), "--check", "subreg",
                      "--point", "0,0", "--report", str(tmp_path / "r.json")], capsys)
    assert code == EXIT_INPUT


def test_corpus_config_errors(tmp_path, capsys):
    rep = tmp_path / "r.json"
    for argv in (["--corpus", "E99"], ["--corpus", "E6", "--N", "5"],
                 ["--corpus", "E6", "--check", "subreg"], ["--corpus", "E6", "--resolution", "0"]):
        code, _, _ = run([*argv, "--report", str(rep)], capsys)
        assert code == EXIT_CONFIG
    assert not rep.exists()


def test_corpus_mode_deterministic(tmp_path, capsys):
    reps = [tmp_path / "a.json", tmp_path / "b.json"]
    for rep in reps:
        code, out, _ = run(["--corpus", "E4,E6", "--resolution", "1e-2", "--N", "10",
                            "--report", str(rep)], capsys)
        assert code == EXIT_OK and out == f"{rep}\n"
    assert reps[0].read_bytes() == reps[1].read_bytes()
    data = json.loads(reps[0].read_text())
    assert data["passed"] and data["classification"]["agreement"] == 1.0


def test_corpus_mismatch_exit(tmp_path, capsys, monkeypatch):
    (e6,) = corpus.get_entries(["E6"])
    flipped = tuple(dataclasses.replace(x, verdict=FAILS if x.verdict == HOLDS else HOLDS)
                    if i == 0 else x for i, x in enumerate(e6.expected))
    bad = dataclasses.replace(e6, expected=flipped)
    monkeypatch.setattr(corpus, "get_entries", lambda ids=None: (bad,))
    rep = tmp_path / "r.json"
    code, _, _ = run(["--corpus", "E6", "--report", str(rep)], capsys)
    assert code == EXIT_MISMATCH
    # the report is still written so the mismatch can be inspected
    assert json.loads(rep.read_text())["passed"] is False


def test_module_entry_point(tmp_path):
    prob = write(tmp_path / "p.json", LINEAR)
    rep = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "setreg", "--input", prob, "--check", "lip",
                           "--point", "0,0", "--L", "3", "--report", str(rep)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == str(rep)
    assert json.loads(rep.read_text())["results"][0]["report"]["verdict"] == HOLDS
