import pytest

from schedcheck.frontend import (DuplicateDeclaration, FrontendError, MTLSyntaxError,
                                 RecursionDetected, StatementBudgetExceeded, UndeclaredIdentifier,
                                 format_program, inline_and_unwind, load, parse, program_order)
from schedcheck.frontend import ast as A
from schedcheck.frontend.normalize import ASSERT, ASSUME, READ, WRITE


def test_parse_roundtrip_of_formatted_program():
    src = """
    shared int x = 3;
    thread t { local int a = x + 1; if (a > 2) { x = a * 2; } else { x = 0 - a; } }
    main { h = spawn t; join h; assert(x != 1 || !(x == 2)); }
    """
    prog = parse(src)
    again = parse(format_program(prog))
    assert again == prog


def test_operator_precedence():
    prog = parse("shared int x; main { x = 1 + 2 * 3 == 7 && 1 < 2 || 0; }")
    e = prog.main[0].value
    assert isinstance(e, A.Binary) and e.op == "||"
    assert e.left.op == "&&"
    assert e.left.left.op == "=="
    assert e.left.left.left.op == "+"
    assert e.left.left.left.right.op == "*"


def test_comments_and_default_shared_initializer():
    prog = parse("// c\nshared int x; /* block\n comment */ main { }")
    assert prog.shared[0].init == 0


@pytest.mark.parametrize("src, exc", [
    ("main { x = 1; }", UndeclaredIdentifier),
    ("shared int x; shared int x; main { }", DuplicateDeclaration),
    ("shared int x; main { local int x = 1; }", DuplicateDeclaration),
    ("main { local int a = 1; local int a = 2; }", DuplicateDeclaration),
    ("main { h = spawn nowhere; }", UndeclaredIdentifier),
    ("thread t { } main { h = spawn t; join h; join h; }", FrontendError),
    ("thread t { } main { if (1) { h = spawn t; } }", FrontendError),
    ("thread t { } main { h = spawn t; local int a = h; }", FrontendError),
    ("main { local int a = 1 }", MTLSyntaxError),
    ("main { $ }", MTLSyntaxError),
    ("shared int x = y; main { }", MTLSyntaxError),
])
def test_frontend_rejects(src, exc):
    with pytest.raises(exc):
        parse(src)


def test_error_carries_position():
    with pytest.raises(UndeclaredIdentifier) as info:
        parse("main {\n  q = 1;\n}")
    assert info.value.pos.line == 2


def test_recursive_spawn_detected():
    prog = parse("thread a { h = spawn b; join h; } thread b { h = spawn a; join h; } main { h = spawn a; join h; }")
    with pytest.raises(RecursionDetected):
        inline_and_unwind(prog, 1)


def test_unwinding_budget():
    prog = parse("shared int x; main { while (x < 5) { while (x < 4) { x = x + 1; } } }")
    with pytest.raises(StatementBudgetExceeded):
        inline_and_unwind(prog, 50, budget=100)


def test_unwind_depth_must_be_positive():
    with pytest.raises(ValueError):
        load("main { }", unwind=0)


def test_unwinding_ends_in_assume_or_assert():
    src = "shared int x; main { while (x < 3) { x = x + 1; } }"
    kinds = [s.kind for s in load(src, 2).statements()]
    assert kinds.count(ASSUME) == 1
    kinds = [s.kind for s in load(src, 2, unwinding_assertions=True).statements()]
    assert kinds.count(ASSERT) == 1 and ASSUME not in kinds


def test_running_example_event_numbering(running_example):
    p = running_example
    names = []
    counters = {}
    for s in p.events:
        counters[s.var] = counters.get(s.var, 0) + 1
        names.append(f"{s.var}{counters[s.var]}")
    # thr1 is numbered right after the init writes, thr2 after thr1, main's reads last
    assert names == ["x1", "y1", "m1", "n1", "y2", "x2", "y3", "m2", "x3",
                     "x4", "y4", "x5", "n2", "y5", "m3", "n3"]
    assert [s.kind for s in p.events[:4]] == [WRITE] * 4
    assert all(s.is_init for s in p.events[:4])
    assert p.events[4].kind == READ and p.events[4].thread == 1


def test_shared_reads_are_hoisted_left_to_right():
    p = load("shared int x; shared int y; main { local int a = x - y; }")
    reads = [s for s in p.statements() if s.kind == READ]
    assert [s.var for s in reads] == ["x", "y"]


def test_program_order_covers_spawn_and_join(running_example):
    p = running_example
    po = program_order(p)
    assert po.is_acyclic()
    # init writes precede every thread event; thread events precede main's reads
    for e in range(4, 14):
        assert (0, e) in po and (e, 14) in po
    # the two spawned threads are unordered
    assert (4, 9) not in po and (9, 4) not in po
    hasse = set(po.reduction())
    assert (0, 1) in hasse and (0, 2) not in hasse


def test_local_without_initializer_defaults_to_zero():
    p = load("shared int x; main { local int t; x = t; }")
    assigns = [s for s in p.statements() if s.kind == "assign"]
    assert assigns[0].expr == A.IntLit(0)
