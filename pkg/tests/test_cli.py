from __future__ import annotations

import json
import re
import subprocess
import sys

import pytest

from artdna.cli import main
from artdna.dna import topology
from conftest import CORPUS, corpus_dna


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name, counts", [("battery", "12 elements, 4 distinct"),
                                          ("balancer", "20 elements, 8 distinct")])
def test_compile_reports_counts(tmp_path, capsys, name, counts):
    out_file = tmp_path / f"{name}.adnb"
    code, out, _ = run_cli(capsys, "compile", str(CORPUS / f"{name}.adna"), "--out", str(out_file))
    assert code == 0 and counts in out
    assert out_file.read_bytes() == (CORPUS / f"{name}.adnb").read_bytes()


def test_malformed_file_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.adna"
    bad.write_text("70 () 1 10\n500 (1:1.1 x\n")
    code, _, err = run_cli(capsys, "compile", str(bad))
    assert code == 1 and re.search(r"bad\.adna:2:\d+", err)


def test_validation_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "dangling.adna"
    bad.write_text("70 (1:9.1) 1 10\n")
    code, _, err = run_cli(capsys, "compile", str(bad))
    assert code == 1 and "dangling" in err
    code, out, _ = run_cli(capsys, "validate", str(bad))
    assert code == 1 and "line 1" in out


def test_io_errors_exit_2(tmp_path, capsys):
    assert run_cli(capsys, "compile", str(tmp_path / "missing.adna"))[0] == 2
    assert run_cli(capsys, "report", str(tmp_path / "missing.ndjson"))[0] == 2
    assert run_cli(capsys, "run", "no_such_scenario")[0] == 2
    assert run_cli(capsys, "frobnicate")[0] == 2
    assert run_cli(capsys)[0] == 2


def test_compile_decompile_compile_is_byte_stable(tmp_path, capsys):
    first = tmp_path / "a.adnb"
    text = tmp_path / "a.adna"
    second = tmp_path / "b.adnb"
    assert run_cli(capsys, "compile", str(CORPUS / "balanced_agv.adna"), "--out", str(first))[0] == 0
    assert run_cli(capsys, "decompile", str(first), "--out", str(text))[0] == 0
    assert run_cli(capsys, "compile", str(text), "--out", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_decompile_to_stdout(capsys):
    code, out, _ = run_cli(capsys, "decompile", str(CORPUS / "battery.adnb"))
    assert code == 0 and out.splitlines()[0] == "500 (1:3.1) 1 100"


def test_graph_matches_topology(capsys):
    code, out, _ = run_cli(capsys, "graph", str(CORPUS / "battery.adna"))
    assert code == 0 and out.startswith("digraph")
    nodes = re.findall(r"^\s+L\d+ \[", out, re.M)
    edges = re.findall(r"^\s+L(\d+) -> L(\d+)", out, re.M)
    topo = topology(corpus_dna("battery"))
    assert len(nodes) == 12
    assert sorted((int(a) - 1, int(b) - 1) for a, b in edges) == sorted((e.src, e.dst) for e in topo.edges)


def test_elements_lists_registry(capsys):
    code, out, _ = run_cli(capsys, "elements")
    assert code == 0
    assert "Complementary Filter" in out and "DNA Logger" in out
    assert len(out.splitlines()) == 1 + 19


def test_run_and_report(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "run", "battery_kill", "--out", str(tmp_path))
    assert code == 0
    assert re.search(r"^relocations\s+3$", out, re.M)
    trace = tmp_path / "battery_kill.ndjson"
    assert trace.exists() and (tmp_path / "battery_kill.csv").exists()
    code, out, _ = run_cli(capsys, "report", str(trace), "--format", "json")
    report = json.loads(out)
    assert code == 0 and report["relocations"] == 3 and report["max_jitter_ms"] == 0
    code, out, _ = run_cli(capsys, "report", str(trace), "--format", "csv")
    assert out.splitlines()[0].startswith("duration_ms,build_time_ms")


def test_run_flags(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "run", "battery_kill", "--seed", "3", "--duration", "400",
                           "--mode", "realtime", "--speed", "50", "--out", str(tmp_path))
    assert code == 0 and re.search(r"^duration_ms\s+400$", out, re.M)


def test_run_writes_importance(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "run", "brake", "--out", str(tmp_path))
    imp = json.loads((tmp_path / "brake.importance.json").read_text())
    assert code == 0 and imp["1"] == 9 and imp["3"] == 5


def test_report_on_empty_trace(tmp_path, capsys):
    empty = tmp_path / "empty.ndjson"
    empty.write_text("")
    code, out, _ = run_cli(capsys, "report", str(empty))
    assert code == 0
    values = [line.split()[-1] for line in out.splitlines()]
    assert values and all(float(v) == 0 for v in values)


def test_malformed_trace(tmp_path, capsys):
    bad = tmp_path / "bad.ndjson"
    bad.write_text("{not json\n")
    assert run_cli(capsys, "report", str(bad))[0] == 1


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "artdna.cli", "elements"], capture_output=True, text=True)
    assert res.returncode == 0 and "PID" in res.stdout
