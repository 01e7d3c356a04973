from __future__ import annotations

from . import ast as A
from .errors import RecursionDetected, StatementBudgetExceeded

DEFAULT_STATEMENT_BUDGET = 200_000


def _spawn_targets(body):
    for s in body:
        if isinstance(s, A.Spawn):
            yield s.thread, s.pos
        elif isinstance(s, A.If):
            yield from _spawn_targets(s.then)
            yield from _spawn_targets(s.orelse)
        elif isinstance(s, A.While):
            yield from _spawn_targets(s.body)


def check_no_recursion(program: A.Program) -> None:
    """Reject thread functions that (transitively) spawn themselves."""
    graph = {name: [t for t, _ in _spawn_targets(body)] for name, body in program.bodies()}
    state: dict[str, int] = {}

    def visit(name, stack):
        state[name] = 1
        for child in graph.get(name, ()):
            if state.get(child) == 1:
                cycle = " -> ".join(stack + [name, child])
                raise RecursionDetected(f"recursive thread creation: {cycle}")
            if child not in state:
                visit(child, stack + [name])
        state[name] = 2

    for name in graph:
        if name not in state:
            visit(name, [])


def _negate(cond):
    return A.Unary("!", cond, getattr(cond, "pos", None))


class _Unroller:
    def __init__(self, depth, budget, assertions):
        self.depth = depth
        self.budget = budget
        self.assertions = assertions
        self.count = 0

    def tick(self, n=1):
        self.count += n
        if self.count > self.budget:
            raise StatementBudgetExceeded(
                f"unwound program exceeds the statement budget of {self.budget}")

    def block(self, body):
        out = []
        for s in body:
            out.extend(self.stmt(s))
        return tuple(out)

    def stmt(self, s):
        if isinstance(s, A.If):
            self.tick()
            return [A.If(s.cond, self.block(s.then), self.block(s.orelse), s.pos)]
        if isinstance(s, A.While):
            body = self.block(s.body)
            stop = (A.Assert if self.assertions else A.Assume)(_negate(s.cond), s.pos)
            self.tick()
            inner: tuple = (stop,)
            for _ in range(self.depth):
                self.tick(len(body) + 1)
                inner = (A.If(s.cond, body + inner, (), s.pos),)
            return list(inner)
        self.tick()
        return [s]


def inline_and_unwind(program: A.Program, depth: int, *,
                      budget: int = DEFAULT_STATEMENT_BUDGET,
                      unwinding_assertions: bool = False) -> A.Program:
    """Return a loop-free copy of ``program`` with every loop unwound ``depth`` times.

    After the last copy of a loop body the loop condition is assumed false
    (or asserted false when ``unwinding_assertions`` is set).  MTL has no
    procedure calls other than thread entry points, so inlining reduces to
    checking that thread creation is not recursive.
    """
    if depth < 1:
        raise ValueError("unwind depth must be at least 1")
    check_no_recursion(program)
    u = _Unroller(depth, budget, unwinding_assertions)
    threads = {name: u.block(body) for name, body in program.threads.items()}
    return A.Program(program.shared, threads, u.block(program.main))
