from __future__ import annotations

import json
import subprocess
import sys

import pytest

from hyperforge.cli import main
from hyperforge.constructions import synthetic_partite_system
from hyperforge.formats import dump_bundle, read_hypergraph
from hyperforge.hypercore import count_cliques


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*args) -> int:
    return main([str(a) for a in args])


@pytest.fixture
def pattern(work):
    (work / "F.hg").write_text("hg 3 4 3\n0 1 2\n0 1 3\n0 2 3\n")
    return work / "F.hg"


class TestConstruct:
    def test_parity_is_byte_identical(self, work):
        assert run("construct", "parity", "--n", 20, "--r", 3, "--seed", 1, "--out", "a.hg") == 0
        assert run("construct", "parity", "--n", 20, "--r", 3, "--seed", 1, "--out", "b.hg") == 0
        assert (work / "a.hg").read_bytes() == (work / "b.hg").read_bytes()
        head = (work / "a.hg").read_text().splitlines()[0]
        assert json.loads(head[2:]) == {"construction": "parity", "params": {"n": 20, "r": 3}, "seed": 1}

    def test_stepup_dimension_mismatch(self, work):
        run("construct", "triangle-free", "--n", 10, "--out", "low.hg")
        run("construct", "labeling", "--N", 20, "--colors", 9, "--out", "lab.lab")
        assert run("construct", "stepup", "--low", "low.hg", "--labeling", "lab.lab", "--out", "x.hg") == 2

    def test_stepup_from_files(self, work):
        run("construct", "triangle-free", "--n", 10, "--seed", 3, "--out", "low.hg")
        run("construct", "labeling", "--N", 30, "--colors", 10, "--seed", 3, "--out", "lab.lab")
        assert run("construct", "stepup", "--low", "low.hg", "--labeling", "lab.lab", "--out", "up.hg") == 0
        assert count_cliques(read_hypergraph("up.hg"), 4) == 0

    def test_deletion_round_trip(self, work):
        assert run("construct", "deletion", "--n", 200, "--seed", 7, "--out", "d.hg") == 0
        H = read_hypergraph("d.hg")
        assert count_cliques(H, 4) == 0
        assert run("certify", "induced-free", "--host", "d.hg", "--pattern", "K4.hg") == 2

    def test_invalid_params(self, work):
        assert run("construct", "parity", "--n", 2) == 2
        assert run("construct", "parity", "--n", 5, "--seed", -1) == 2
        assert run("construct", "nope") == 2


class TestCertify:
    def test_partite_free_on_empty_complement(self, work):
        (work / "e.hg").write_text("hg 3 6 0\n")
        assert run("certify", "partite-free", "--host", "e.hg", "--t", 2, "--complement",
                   "--out", "r.json") == 1
        rep = json.loads((work / "r.json").read_text())
        assert rep["verdict"] == "witness" and len(rep["witness"]) == 3

    def test_malformed_file(self, work):
        (work / "bad.hg").write_text("hg 3 4 2\n0 1 2\n")
        assert run("certify", "homogeneous", "--host", "bad.hg", "--m", 3) == 2

    def test_missing_file(self, work):
        assert run("certify", "homogeneous", "--host", "nowhere.hg", "--m", 3) == 2

    def test_missing_parameter(self, work):
        (work / "e.hg").write_text("hg 3 6 0\n")
        assert run("certify", "eta-homogeneous", "--host", "e.hg", "--m", 4) == 2

    def test_budget_exit(self, work):
        run("construct", "parity", "--n", 20, "--out", "p.hg")
        assert run("certify", "homogeneous", "--host", "p.hg", "--m", 12, "--budget", 10) == 3

    def test_certified_exit_and_report(self, work, pattern):
        run("construct", "parity", "--n", 20, "--seed", 4, "--out", "p.hg")
        assert run("certify", "induced-free", "--host", "p.hg", "--pattern", pattern, "--out", "r.json") == 0
        rep = json.loads((work / "r.json").read_text())
        assert rep["verdict"] == "certified-absent" and rep["mode"] == "exact"
        assert "wall_time" not in rep

    def test_density_window_sampled(self, work):
        run("construct", "parity", "--n", 30, "--out", "p.hg")
        code = run("certify", "density-window", "--host", "p.hg", "--w", 10, "--eps", "1/5",
                   "--mode", "sampled", "--samples", 500, "--seed", 3, "--out", "a.json")
        run("certify", "density-window", "--host", "p.hg", "--w", 10, "--eps", "1/5",
            "--mode", "sampled", "--samples", 500, "--seed", 3, "--out", "b.json")
        assert code in (0, 1)
        assert (work / "a.json").read_bytes() == (work / "b.json").read_bytes()

    def test_sampled_needs_samples(self, work):
        run("construct", "parity", "--n", 12, "--out", "p.hg")
        assert run("certify", "density-window", "--host", "p.hg", "--w", 6, "--eps", "1/5",
                   "--mode", "sampled", "--samples", 0) == 2

    def test_witness_property(self, work, pattern):
        run("construct", "parity", "--n", 12, "--seed", 0, "--out", "p.hg")
        code = run("certify", "witness", "--host", "p.hg", "--pattern", pattern, "--t", 4, "--out", "w.json")
        rep = json.loads((work / "w.json").read_text())
        assert code == (1 if rep["verdict"] == "witness" else 0)
        assert [s["details"].get("target") for s in rep["subreports"]] == [None, "host", "complement"]

    def test_timing_flag(self, work):
        (work / "e.hg").write_text("hg 3 6 0\n")
        run("certify", "homogeneous", "--host", "e.hg", "--m", 4, "--timing", "--out", "r.json")
        assert "wall_time" in json.loads((work / "r.json").read_text())


class TestOther:
    def test_amplify(self, work):
        (work / "b.bundle").write_text(dump_bundle(synthetic_partite_system(3, 32, 0.0, 0)))
        assert run("amplify", "--bundle", "b.bundle", "--eps", 1, "--eta", "1/10", "--out", "t.jsonl") == 0
        lines = (work / "t.jsonl").read_text().splitlines()
        assert len(lines) == 4 and json.loads(lines[-1])["retention_holds"] is True

    def test_amplify_precondition(self, work):
        (work / "b.bundle").write_text(dump_bundle(synthetic_partite_system(3, 8, 0.5, 0)))
        assert run("amplify", "--bundle", "b.bundle", "--eps", 1, "--eta", "1/10") == 2

    def test_fmt(self, work):
        (work / "x.hg").write_text("# note\nhg 3 4 1\n0 1   2\n")
        assert run("fmt", "x.hg", "--out", "y.hg") == 0
        assert (work / "y.hg").read_text() == "# note\nhg 3 4 1\n0 1 2\n"
        assert run("fmt", "x.hg", "--check") == 0
        (work / "z.hg").write_text("junk\n")
        assert run("fmt", "z.hg", "--check") == 2

    def test_empty_seed_sweep(self, work, capsys):
        assert run("experiment", "stepup-ledger", "--seeds", "--ledger", "L") == 0
        assert (work / "L" / "entries").is_dir()
        assert not list((work / "L" / "entries").iterdir())

    def test_ledger_env(self, work, monkeypatch):
        monkeypatch.setenv("HYPERFORGE_LEDGER", str(work / "envled"))
        assert run("experiment", "stepup-ledger", "--seeds", 1, "--n-low", 10, "--max-N", 30,
                   "--labelings", 2) == 0
        assert (work / "envled" / "log.jsonl").exists()

    def test_er_demo_json(self, work, capsys):
        assert run("experiment", "er-demo", "--n", 256, "--runs", 2, "--format", "json") == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 2 and all(r["p"] >= 3 for r in rows)

    def test_help_exits_zero(self):
        assert run("--help") == 0

    def test_module_entry_point(self, work):
        out = subprocess.run([sys.executable, "-m", "hyperforge", "construct", "parity", "--n", "5"],
                             capture_output=True, text=True)
        assert out.returncode == 0 and out.stdout.startswith("# ")
