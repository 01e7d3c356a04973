import pytest

from schedcheck.driver import Config, build_witness, verify, verify_source
from schedcheck.encoder import encode
from schedcheck.eog import build_eog
from schedcheck.exactorder import validate_exact
from schedcheck.frontend import load
from schedcheck.oracle import replay
from schedcheck.sat import Solver

from conftest import CORPUS

WEAKENED = (CORPUS / "running_example_weakened.mtl").read_text()


def test_running_example_safe_without_fallback(running_example):
    v = verify(running_example, Config(check_invariants=True))
    assert v.safe
    assert 1 <= v.stats.iterations <= 10
    assert v.stats.fallback_invocations == 0
    assert v.stats.solver_calls == v.stats.iterations + 1
    assert all(src == "graph" for src, _ in v.stats.kappas)


def test_same_seed_same_trace(running_example):
    a = verify(running_example, Config(seed=3))
    b = verify(running_example, Config(seed=3))
    assert a.stats.kappas == b.stats.kappas


@pytest.mark.parametrize("engine", ["cegar", "monolithic", "explicit"])
def test_weakened_claim_unsafe_with_replaying_witness(engine):
    v = verify_source(WEAKENED, Config(engine=engine))
    assert v.unsafe
    assert replay(load(WEAKENED), v.witness).ok


def test_trivial_assertion_needs_no_refinement():
    v = verify_source("shared int x; thread t { x = 1; } main { h = spawn t; join h; assert(1 == 1); }")
    assert v.safe and v.stats.iterations == 0 and v.stats.solver_calls == 1


def test_iteration_budget_gives_unknown(running_example):
    v = verify(running_example, Config(max_iter=1))
    assert v.kind == "UNKNOWN" and v.reason


def test_time_budget_gives_unknown(running_example):
    v = verify(running_example, Config(time_limit=0.0))
    assert v.kind == "UNKNOWN"


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        Config(engine="bogus")
    with pytest.raises(ValueError):
        Config(unwind=0)


def test_witness_of_single_threaded_program_is_program_order():
    src = "shared int x = 1; main { local int a = x; x = a + 2; assert(x == 1); }"
    p = load(src)
    ep = encode(p)
    s = Solver()
    s.reserve(ep.cnf.nvars)
    s.add_clauses(ep.cnf.clauses())
    r = s.solve()
    g = build_eog(ep, r.model)
    w = build_witness(ep, g, validate_exact(g).order, r.model)
    assert [(st.thread, st.index) for st in w.steps] == [(0, i) for i in range(len(p.threads[0].stmts))]


def test_witness_elides_disabled_branches():
    src = """
    shared int x = 0;
    main {
      if (x == 1) { x = 7; } else { x = 2; }
      assert(x == 7);
    }"""
    v = verify_source(src)
    assert v.unsafe
    texts = [st.text for st in v.witness.steps]
    assert "x = 2" in texts and "x = 7" not in texts


def test_independent_threads_any_interleaving_replays():
    src = """
    shared int a = 0;
    shared int b = 0;
    thread p { a = 1; }
    thread q { b = 1; }
    main { h = spawn p; k = spawn q; join h; join k; assert(a + b == 3); }"""
    for seed in range(3):
        v = verify_source(src, Config(seed=seed))
        assert v.unsafe and replay(load(src), v.witness).ok


def test_fallback_path_end_to_end():
    src = (CORPUS / "butterfly_fallback.mtl").read_text()
    v = verify_source(src, Config(check_invariants=True))
    assert v.safe and v.stats.fallback_invocations >= 1
    assert any(source == "exact" for source, _ in v.stats.kappas)
    assert verify_source(src, Config(engine="explicit")).safe


def test_stats_json_schema(running_example):
    doc = verify(running_example).stats.to_json("SAFE")
    for key in ("schema_version", "engine", "verdict", "iterations", "clauses_initial",
                "clauses_refinement", "time_ms", "fallback_invocations"):
        assert key in doc
    assert set(doc["time_ms"]) == {"encode", "solve", "closure", "exact"}
