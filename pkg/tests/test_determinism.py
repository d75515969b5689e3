from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from multiway import (
    auto_homotopy,
    evolve,
    graph_to_dot,
    graph_to_json,
    verify_double_category,
    verify_groupoid,
    verify_nfold,
)
from multiway._parallel import ordered_map, thread_count

from conftest import SOURCE, TARGET

THREADS = ["1", "4", "16"]


def _specs_text(specs):
    return json.dumps([[(r.id, r.lhs, r.rhs, r.order) for r in s.rungs] for s in specs])


def test_ordered_map_preserves_order(monkeypatch):
    items = list(range(50))
    for n in THREADS:
        monkeypatch.setenv("MULTIWAY_THREADS", n)
        assert thread_count() == int(n)
        for seed in (None, 1, 2):
            assert ordered_map(lambda x: x * x, items, shuffle_seed=seed) == [x * x for x in items]
    monkeypatch.setenv("MULTIWAY_THREADS", "zero")
    with pytest.raises(ValueError):
        thread_count()


def test_library_outputs_identical_across_threads_and_shuffles(monkeypatch, base, order3):
    seen = set()
    for n in THREADS:
        monkeypatch.setenv("MULTIWAY_THREADS", n)
        for seed in (None, 7, 99):
            g = evolve([SOURCE], base, 6, shuffle_seed=seed)
            g3 = evolve([SOURCE], order3.combined, 6, shuffle_seed=seed)
            blob = "\n".join([
                graph_to_json(g),
                graph_to_dot(g3),
                _specs_text(auto_homotopy(g, SOURCE, TARGET, 6, 2, shuffle_seed=seed)),
                verify_double_category(order3, g3).to_json(),
                verify_nfold(order3, g3, 3).to_json(),
                verify_groupoid(order3, g3, 3).to_json(),
                verify_nfold(order3, g3, 3).to_text(),
            ])
            seen.add(blob)
    assert len(seen) == 1


@pytest.mark.parametrize("command", [
    ["evolve", "-i", "AA", "-g", "8", "--format", "json"],
    ["proofs", "--from", "AA", "--to", "ABBBABBB", "--max-len", "6"],
    ["homotopy", "--from", "AA", "--to", "ABBBABBB", "--max-len", "6", "--order", "3"],
])
def test_cli_bytes_stable_across_processes(tmp_path, command):
    rules = tmp_path / "grow.rules"
    rules.write_text("A -> AB\n")
    outputs = set()
    for n, hashseed in zip(THREADS, ("0", "1", "12345")):
        env = dict(os.environ, MULTIWAY_THREADS=n, PYTHONHASHSEED=hashseed)
        proc = subprocess.run([sys.executable, "-m", "multiway", command[0], "-r", str(rules), *command[1:]],
                              capture_output=True, env=env)
        assert proc.returncode == 0, proc.stderr
        outputs.add(proc.stdout + proc.stderr)
    assert len(outputs) == 1


def test_verify_cli_bytes_stable(tmp_path):
    rules = tmp_path / "grow.rules"
    rules.write_text("A -> AB\n")
    ext = tmp_path / "ext.rules"
    subprocess.run([sys.executable, "-m", "multiway", "homotopy", "-r", str(rules), "--from", "AA",
                    "--to", "ABBBABBB", "--max-len", "6", "--order", "3", "-o", str(ext)], check=True,
                   capture_output=True)
    outputs = set()
    for n, hashseed in zip(THREADS, ("3", "4", "5")):
        env = dict(os.environ, MULTIWAY_THREADS=n, PYTHONHASHSEED=hashseed)
        proc = subprocess.run([sys.executable, "-m", "multiway", "verify", "-r", str(ext), "--check", "structure",
                               "--check", "groupoid", "--invert", "--format", "json"], capture_output=True, env=env)
        assert proc.returncode == 0, proc.stdout
        outputs.add(proc.stdout)
    assert len(outputs) == 1
