from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from conftest import CORPUS, NEG, POSITIVE, ROOT, needs_no_prelude

from polarkit.cli import EXIT_DIAGNOSTICS, EXIT_OK, EXIT_USAGE, main
from polarkit.pipeline import PRELUDE_PATH

LOOP = """\
codata Box { .d: Nat }
let loop: Nat { (comatch L { .d => L.d } : Box).d }
"""


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def corpus_args(path):
    return ["--no-prelude", path] if needs_no_prelude(path) else [path]


class TestExitCodes:
    def test_check_with_explicit_prelude(self):
        code, out, _ = run_cli("check", "std/prelude.pol", CORPUS / "set_data.pol")
        assert code == EXIT_OK and out == "ok\n"

    def test_diagnostics(self):
        code, _, err = run_cli("check", NEG / "label_confusion.pol")
        assert code == EXIT_DIAGNOSTICS
        assert "error[TypeMismatch]" in err and "CONV-COMATCH-BOT" in err

    def test_missing_file(self):
        code, _, err = run_cli("check", "does/not/exist.pol")
        assert code == EXIT_USAGE and err.startswith("error:")

    @pytest.mark.parametrize("argv", [[], ["frobnicate"], ["run", "x.pol"], ["check", "--fuel", "0", "x.pol"]])
    def test_usage(self, argv, capsys):
        assert run_cli(*argv)[0] == EXIT_USAGE

    def test_unknown_let(self):
        assert run_cli("run", CORPUS / "bool.pol", "nope")[0] == EXIT_USAGE


class TestRun:
    def test_double_negation(self):
        code, out, _ = run_cli("run", CORPUS / "bool.pol", "notnot_t")
        assert (code, out) == (EXIT_OK, "T\n")

    def test_streams(self):
        assert run_cli("run", CORPUS / "streams.pol", "third_from_zero")[1] == "S(S(Z))\n"

    def test_fuel_exhaustion(self, tmp_path):
        f = tmp_path / "loop.pol"
        f.write_text(LOOP)
        assert run_cli("check", f)[0] == EXIT_OK
        code, out, err = run_cli("run", "--fuel", "300", f, "loop")
        assert code == EXIT_DIAGNOSTICS and out == "" and "FuelExhausted" in err


class TestJson:
    def test_schema(self):
        code, out, err = run_cli("check", "--json", NEG / "label_confusion.pol")
        assert code == EXIT_DIAGNOSTICS and err == ""
        (line,) = out.splitlines()
        d = json.loads(line)
        assert set(d) == {"code", "message", "notes", "severity", "span"}
        assert d["severity"] == "error" and d["code"] == "TypeMismatch"
        assert "rule: CONV-COMATCH-BOT" in d["notes"]
        assert set(d["span"]) == {"file", "line", "col"} and d["span"]["line"] == 2

    def test_success_prints_nothing(self):
        assert run_cli("check", "--json", CORPUS / "bool.pol")[:2] == (EXIT_OK, "")


class TestTraces:
    def test_conversion_trace_text(self):
        _, _, err = run_cli("check", "--explain-conv", CORPUS / "bool.pol")
        rules = {line.split(":")[0] for line in err.splitlines()}
        assert {"CONV-ALPHA", "CONV-RED"} <= rules

    def test_unification_trace_text(self):
        _, _, err = run_cli("check", "--explain-unify", CORPUS / "vec.pol")
        assert "CONFLICT1: Z ≡ S(n)" in err.splitlines()

    def test_json_traces(self):
        _, _, err = run_cli("check", "--trace-json", CORPUS / "vec.pol")
        entries = [json.loads(line) for line in err.splitlines()]
        assert {e["kind"] for e in entries} == {"conv", "unify"}
        assert all("rule" in e for e in entries)
        _, _, only_unify = run_cli("check", "--trace-json", "--explain-unify", CORPUS / "vec.pol")
        assert {json.loads(line)["kind"] for line in only_unify.splitlines()} == {"unify"}


@pytest.mark.parametrize("path", POSITIVE, ids=[p.name for p in POSITIVE])
def test_elaborate_round_trips(path, tmp_path):
    code, text, _ = run_cli("elaborate", *corpus_args(path))
    assert code == EXIT_OK
    out = tmp_path / path.name
    out.write_text(text, encoding="utf-8")
    files = [out] if needs_no_prelude(path) else [PRELUDE_PATH, out]
    assert run_cli("check", "--no-prelude", *files)[:2] == (EXIT_OK, "ok\n")
    flags = ["--no-prelude"] if needs_no_prelude(path) else []
    assert run_cli("elaborate", *flags, out)[1] == text  # fixed point


def test_output_is_byte_identical_across_processes():
    argv = [sys.executable, "-m", "polarkit", "check", "--explain-conv", "--explain-unify", str(NEG / "label_confusion.pol")]
    runs = [subprocess.run(argv, capture_output=True, cwd=ROOT) for _ in range(2)]
    assert runs[0].returncode == EXIT_DIAGNOSTICS
    assert runs[0].stdout == runs[1].stdout and runs[0].stderr == runs[1].stderr
    elab = [sys.executable, "-m", "polarkit", "elaborate", str(CORPUS / "fun_pi.pol")]
    a, b = (subprocess.run(elab, capture_output=True, cwd=ROOT).stdout for _ in range(2))
    assert a == b and a
