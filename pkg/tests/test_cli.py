import json
import shutil

import pytest

from schedcheck.cli import main
from schedcheck.oracle import Schedule, replay
from schedcheck.frontend import load

from conftest import CORPUS, DATA


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_safe(capsys, tmp_path):
    stats = tmp_path / "s.json"
    code, out, _ = run(capsys, "verify", CORPUS / "running_example.mtl", "--stats", stats)
    assert code == 0 and out.strip() == "SAFE"
    doc = json.loads(stats.read_text())
    assert doc["engine"] == "cegar" and doc["verdict"] == "SAFE" and doc["fallback_invocations"] == 0


def test_verify_unsafe_writes_witness(capsys, tmp_path):
    w = tmp_path / "w.json"
    path = CORPUS / "racy_counter.mtl"
    code, out, _ = run(capsys, "verify", path, "--witness", w, "--engine", "monolithic")
    assert code == 1 and out.strip() == "UNSAFE"
    sched = Schedule.from_json(json.loads(w.read_text()))
    assert replay(load(path.read_text()), sched).ok
    rec = json.loads(w.read_text())["steps"][0]
    assert set(rec) >= {"step", "thread", "statement_text", "writes"}


def test_verify_unknown_on_budget(capsys):
    code, out, _ = run(capsys, "verify", CORPUS / "running_example.mtl", "--max-iter", "0")
    assert code == 2 and out.strip() == "UNKNOWN"


def test_verify_errors(capsys, tmp_path):
    assert run(capsys, "verify", tmp_path / "missing.mtl")[0] == 3
    bad = tmp_path / "bad.mtl"
    bad.write_text("main { y = 1; }")
    code, _, err = run(capsys, "verify", bad)
    assert code == 3 and "undeclared" in err
    assert run(capsys, "verify", bad, "--bogus-flag")[0] == 3
    assert run(capsys, "verify", CORPUS / "running_example.mtl", "--unwind", "0")[0] == 3


def test_all_flags_accepted(capsys):
    code, out, _ = run(capsys, "verify", CORPUS / "racy_counter.mtl", "--engine", "cegar",
                       "--unwind", "3", "--int-width", "6", "--max-iter", "50", "--seed", "2",
                       "--no-link-pruning", "--check-invariants")
    assert code == 1


def make_corpus(tmp_path, names):
    for n in names:
        shutil.copy(CORPUS / f"{n}.mtl", tmp_path)
        shutil.copy(CORPUS / f"{n}.expected", tmp_path)


def test_corpus_summary_and_report(capsys, tmp_path):
    make_corpus(tmp_path, ["racy_counter", "store_buffer", "join_orders"])
    js, rep = tmp_path / "agg.json", tmp_path / "report"
    code, out, _ = run(capsys, "corpus", tmp_path, "--json", js, "--report", rep, "--jobs", "2")
    assert code == 0
    assert "racy_counter.mtl" in out
    doc = json.loads(js.read_text())
    assert doc["programs"] == 3 and doc["mismatches"] == []
    assert [r["file"] for r in doc["results"]] == sorted(r["file"] for r in doc["results"])
    for name in ("summary.csv", "iterations.png", "clause_ratio.png"):
        assert (rep / name).stat().st_size > 0
    assert (rep / "iterations.png").read_bytes()[:4] == b"\x89PNG"


def test_corpus_empty_dir(capsys, tmp_path):
    code, out, _ = run(capsys, "corpus", tmp_path)
    assert code == 0


def test_corpus_names_wrong_expectation(capsys, tmp_path):
    make_corpus(tmp_path, ["racy_counter", "store_buffer"])
    (tmp_path / "store_buffer.expected").write_text("UNSAFE\n")
    code, _, err = run(capsys, "corpus", tmp_path)
    assert code == 1 and "store_buffer.mtl" in err


def test_corpus_malformed_sidecar(capsys, tmp_path):
    make_corpus(tmp_path, ["racy_counter"])
    (tmp_path / "racy_counter.expected").write_text("maybe\n")
    assert run(capsys, "corpus", tmp_path)[0] == 3


def test_corpus_env_override(capsys, tmp_path, monkeypatch):
    make_corpus(tmp_path, ["join_orders"])
    monkeypatch.setenv("MTL_CORPUS", str(tmp_path))
    code, out, _ = run(capsys, "corpus")
    assert code == 0 and "join_orders.mtl" in out and "racy_counter" not in out


def test_dimacs_export(capsys, tmp_path):
    out, sym = tmp_path / "a.cnf", tmp_path / "a.json"
    assert run(capsys, "dimacs", CORPUS / "running_example.mtl", "--out", out, "--symbols", sym)[0] == 0
    mono = tmp_path / "m.cnf"
    assert run(capsys, "dimacs", CORPUS / "running_example.mtl", "--monolithic", "--out", mono)[0] == 0
    from schedcheck.sat import read_dimacs
    n1, c1 = read_dimacs(out)
    n2, c2 = read_dimacs(mono)
    assert len(c1) < len(c2)
    assert "s[x,4,2]" in json.loads(sym.read_text())["links"]


def test_eog_command(capsys):
    code, out, _ = run(capsys, "eog", DATA / "running_example_eog.json")
    assert code == 0 and "closure: infeasible" in out
    assert "kappa: !s[x,4,2] | !s[x,5,1]" in out
    code, out, _ = run(capsys, "eog", DATA / "butterfly_eog.json")
    assert "closure: not-sure" in out and "exact: infeasible" in out
