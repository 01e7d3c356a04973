import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from schedcheck.encoder import encode
from schedcheck.eog import (ContractViolation, EOGEvent, EventOrderGraph, RFEdge, antichain,
                            build_eog, closure, infeasibility_reasons, random_eog, refine, sub_eog)
from schedcheck.sat import Solver

from conftest import DATA


def valid_orders(g):
    """All total orders obeying program order and read-from requirements."""
    n = len(g)
    for perm in itertools.permutations(range(n)):
        pos = {e: i for i, e in enumerate(perm)}
        if any(pos[a] >= pos[b] for a, b in g.po):
            continue
        ok = True
        for e in g.rf:
            w, r = pos[e.writer], pos[e.reader]
            var = g.events[e.writer].var
            if w >= r or any(w < pos[x] < r for x in g.writes_of(var) if x != e.writer):
                ok = False
                break
        if ok:
            yield perm


def always_ordered(g):
    """Pairs (a, b) with a before b in every valid total order."""
    common = None
    for perm in valid_orders(g):
        pairs = {(perm[i], perm[j]) for i in range(len(perm)) for j in range(i + 1, len(perm))}
        common = pairs if common is None else common & pairs
    return common


def graph(spec_events, po, rf):
    events = [EOGEvent(n, n[0], k) for n, k in spec_events]
    idx = {e.name: i for i, e in enumerate(events)}
    edges = [RFEdge(idx[w], idx[r], k + 1, f"s[{r},{w}]") for k, (w, r) in enumerate(rf)]
    return EventOrderGraph(events, [(idx[a], idx[b]) for a, b in po], edges,
                           {e.sel: e.name for e in edges}), idx


# Three small graphs whose extra order comes from the write-before-read rule.
RULE_SHAPES = {
    # x0 before its thread's read x1, which reads x2: x0 must precede x2
    "a": ([("x0", "W"), ("x1", "R"), ("x2", "W")], [("x0", "x1")], [("x2", "x1")]),
    # two writes before a read that reads a third write
    "b": ([("x0", "W"), ("x1", "W"), ("x2", "R"), ("x3", "W")], [("x0", "x1"), ("x1", "x2")],
          [("x3", "x2")]),
    # x0 reaches x3 through a read-from edge and program order
    "c": ([("x0", "W"), ("x1", "R"), ("x2", "W"), ("x3", "R")], [("x1", "x3")],
          [("x0", "x1"), ("x2", "x3")]),
}
RULE_SHAPE_DERIVED = {"a": ("x0", "x2"), "b": ("x0", "x3"), "c": ("x0", "x2")}


@pytest.mark.parametrize("key", sorted(RULE_SHAPES))
def test_small_graph_derivations(key):
    events, po, rf = RULE_SHAPES[key]
    g, idx = graph(events, po, rf)
    out = closure(g)
    assert out.verdict == "not-sure"
    a, b = RULE_SHAPE_DERIVED[key]
    assert out.has(idx[a], idx[b])
    # the closure finds exactly the pairs forced in every valid order
    assert out.orders() == always_ordered(g)


def test_shape_a_derives_only_one_new_order():
    events, po, rf = RULE_SHAPES["a"]
    g, idx = graph(events, po, rf)
    base = set(g.po) | {(e.writer, e.reader) for e in g.rf}
    assert closure(g).orders() - base == {(idx["x0"], idx["x2"])}


def running_example_graph():
    return EventOrderGraph.loads((DATA / "running_example_eog.json").read_text())


def test_running_example_graph_derivations_and_refinement():
    g = running_example_graph()
    out = closure(g)
    i = g.index
    assert out.infeasible
    assert out.reasons_named(i("y3"), i("y4")) == [{"s[y,3,1]"}]
    assert out.reasons_named(i("x5"), i("x2")) == [{"s[x,5,1]"}]
    names = {frozenset(g.name_of(x) for x in r) for r in infeasibility_reasons(out)}
    assert names == {frozenset({"s[y,3,1]", "s[x,5,1]"}), frozenset({"s[x,5,1]", "s[x,4,2]"})}
    kappa = {frozenset(g.name_of(x) for x in c) for c in refine(out)}
    assert kappa == {frozenset({"!s[y,3,1]", "!s[x,5,1]"}), frozenset({"!s[x,5,1]", "!s[x,4,2]"})}


def test_json_roundtrip():
    g = running_example_graph()
    again = EventOrderGraph.loads(g.dumps())
    assert [e.name for e in again.events] == [e.name for e in g.events]
    assert sorted(again.po) == sorted(g.po)
    assert [(e.writer, e.reader, e.name) for e in again.rf] == \
        [(e.writer, e.reader, e.name) for e in g.rf]
    assert closure(again).orders() == closure(g).orders()


def test_json_accepts_names_and_unknown_literals():
    doc = {"events": [{"name": "a", "var": "x", "type": "W"}, {"name": "b", "var": "x", "type": "R"}],
           "po": [["a", "b"]], "rf": [{"writer": "a", "reader": "b", "literal": "s"}]}
    g = EventOrderGraph.from_json(json.dumps(doc))
    assert g.rf[0].sel == 1 and g.name_of(1) == "s"


def test_bad_read_from_edge_rejected():
    with pytest.raises(ContractViolation):
        EventOrderGraph([EOGEvent("x1", "x", "R"), EOGEvent("x2", "x", "R")], [], [RFEdge(0, 1, 1)])


def test_refine_requires_infeasible():
    g, _ = graph(*RULE_SHAPES["a"])
    with pytest.raises(ContractViolation):
        refine(closure(g))


def test_guards_enter_program_order_reasons():
    g = EventOrderGraph([EOGEvent("x1", "x", "W", guard=7), EOGEvent("x2", "x", "R", guard=8)],
                        [(1, 0)], [RFEdge(0, 1, 9)])
    out = closure(g)
    assert out.infeasible
    assert infeasibility_reasons(out) == [frozenset({7, 8, 9})]


def test_antichain():
    sets = [frozenset(s) for s in ({1, 2}, {1}, {2, 3}, {1, 3}, {2, 3})]
    assert antichain(sets) == [frozenset({1}), frozenset({2, 3})]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_worklist_order_does_not_change_the_relation(seed):
    g = random_eog(random.Random(seed), max_events=9, guard_prob=0.3, extra_po_prob=0.02)
    a, b = closure(g), closure(g, lifo=True)
    assert a.orders() == b.orders() and a.verdict == b.verdict


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_every_reason_rederives_its_order(seed):
    g = random_eog(random.Random(seed), max_events=8, guard_prob=0.4)
    out = closure(g)
    for (a, b), reasons in out.reasons.items():
        for r in reasons:
            sub = sub_eog(g, r)
            names = [e.name for e in sub.events]
            sa, sb = names.index(g.events[a].name), names.index(g.events[b].name)
            assert closure(sub).has(sa, sb)


def test_build_eog_from_a_model(running_example):
    ep = encode(running_example)
    s = Solver()
    s.reserve(ep.cnf.nvars)
    s.add_clauses(ep.cnf.clauses())
    r = s.solve()
    g = build_eog(ep, r.model)
    assert len(g) == len(ep.events)
    assert len(g.rf) == sum(1 for e in g.events if e.kind == "R")
    assert all(e.guard is None for e in g.events)
