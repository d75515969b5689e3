from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from multiway import graph_from_json, load_extended
from multiway.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def rules(tmp_path):
    path = tmp_path / "grow.rules"
    path.write_text("A -> AB\n")
    return str(path)


@pytest.fixture
def extended(tmp_path, rules):
    out = tmp_path / "ext.rules"
    code, _, _ = run("homotopy", "-r", rules, "--from", "AA", "--to", "ABBBABBB",
                     "--max-len", "6", "--order", "2", "-o", str(out))
    assert code == 0
    return str(out)


def test_evolve_json(tmp_path, rules):
    out = tmp_path / "g.json"
    code, stdout, _ = run("evolve", "-r", rules, "-i", "AA", "-g", "8", "--format", "json", "-o", str(out))
    assert code == 0
    g = graph_from_json(out.read_text())
    assert (len(g.nodes), len(g.edges)) == (45, 72)
    assert stdout.splitlines()[-1] == "total,45,72"


def test_evolve_dot_and_text(rules):
    code, stdout, stderr = run("evolve", "-r", rules, "-i", "AA", "-g", "2", "--format", "dot")
    assert code == 0 and stdout.startswith("digraph")
    assert "generation,nodes,edges" in stderr
    code, stdout, _ = run("evolve", "-r", rules, "-i", "AA", "-g", "2", "--format", "text")
    assert stdout.splitlines()[0] == "6 nodes, 6 edges, depth 2"


def test_proofs(rules):
    code, stdout, _ = run("proofs", "-r", rules, "--from", "AA", "--to", "ABBBABBB", "--max-len", "6")
    assert code == 0
    assert stdout.splitlines()[0].startswith("20 proofs")
    code, stdout, _ = run("proofs", "-r", rules, "--from", "AAB", "--to", "ABA", "--max-len", "4")
    assert code == 0 and stdout.startswith("0 proofs")
    code, stdout, _ = run("proofs", "-r", rules, "--from", "AA", "--to", "ABBBABBB",
                          "--max-len", "6", "--format", "json")
    assert json.loads(stdout)["count"] == 20


def test_homotopy_writes_loadable_system(extended):
    es = load_extended(open(extended).read())
    assert len(es.combined) == 11


def test_homotopy_inadmissible_exit(rules):
    code, stdout, stderr = run("homotopy", "-r", rules, "--from", "AA", "--to", "AAB",
                               "--max-len", "1", "--order", "3")
    assert code == 4
    assert "reached order 1" in stderr


def test_single_proof_gives_empty_layer(rules):
    code, stdout, stderr = run("homotopy", "-r", rules, "--from", "AA", "--to", "AAB",
                               "--max-len", "1", "--order", "2")
    assert code == 0
    assert stdout == "r1: A -> AB\n@order 2\n"
    assert "2,0" in stderr


def test_zero_generations_and_empty_proof(rules):
    code, stdout, _ = run("evolve", "-r", rules, "-i", "AA", "-g", "0", "--format", "text")
    assert code == 0 and stdout.splitlines()[0] == "1 nodes, 0 edges, depth 0"
    code, stdout, _ = run("proofs", "-r", rules, "--from", "AA", "--to", "AA", "--max-len", "3")
    assert stdout.splitlines() == ["1 proof of AA => AA (max length 3)", "AA"]


def test_verify_structure_and_mutation(tmp_path, extended):
    code, stdout, _ = run("verify", "-r", extended)
    assert code == 0 and "PASS" in stdout.splitlines()[0]
    mutated = tmp_path / "mut.rules"
    mutated.write_text("".join(l for l in open(extended) if not l.startswith("h2_3_inv")))
    code, stdout, _ = run("verify", "-r", str(mutated), "--format", "json")
    assert code == 5
    assert json.loads(stdout)["passed"] is False


def test_verify_groupoid(extended):
    assert run("verify", "-r", extended, "--check", "groupoid")[0] == 5
    assert run("verify", "-r", extended, "--check", "groupoid", "--invert")[0] == 0


def test_parse_and_budget_errors(tmp_path, rules):
    bad = tmp_path / "bad.rules"
    bad.write_text("A -> B\noops\n")
    code, _, stderr = run("evolve", "-r", str(bad), "-i", "A")
    assert code == 2 and "line 2" in stderr
    assert run("evolve", "-r", str(tmp_path / "missing"), "-i", "A")[0] == 2
    assert run("evolve", "-r", rules)[0] == 2
    assert run("evolve", "-r", rules, "-i", "A", "--node-budget", "0")[0] == 2
    assert run("frobnicate")[0] == 2
    code, _, stderr = run("evolve", "-r", rules, "-i", "AA", "-g", "30", "--node-budget", "50")
    assert code == 3 and "generation,nodes" in stderr
    code, _, _ = run("proofs", "-r", rules, "--from", "AA", "--to", "ABBBABBB",
                     "--max-len", "6", "--path-budget", "3")
    assert code == 3


def test_config_file_defaults_and_flag_precedence(tmp_path, rules):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"rules": rules, "initial": ["AA"], "generations": 3}))
    code, stdout, _ = run("evolve", "--config", str(cfg), "--format", "text")
    assert code == 0 and stdout.startswith("10 nodes")
    code, stdout, _ = run("evolve", "--config", str(cfg), "-g", "2", "--format", "text")
    assert stdout.startswith("6 nodes")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("evolve", "--config", str(bad))[0] == 2


def test_report_writes_csv_and_figures(tmp_path, rules):
    out = tmp_path / "rep"
    code, stdout, _ = run("report", "-r", rules, "--from", "AA", "--to", "ABBBABBB",
                          "--max-len", "6", "--order", "2", "-g", "6", "-o", str(out))
    assert code == 0
    with open(out / "census.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["nodes"]) for r in rows] == [1, 2, 3, 4, 5, 6, 7]
    with open(out / "rungs.csv") as fh:
        assert list(csv.reader(fh)) == [["order", "rungs"], ["2", "10"]]
    for name in ("multiway.png", "census.png"):
        assert (out / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert "total,28,52" in stdout


def test_module_entry_point(rules):
    proc = subprocess.run([sys.executable, "-m", "multiway", "proofs", "-r", rules, "--from", "AA",
                           "--to", "ABB", "--max-len", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("0 proofs")
