"""Explicit-state interleaving interpreter for normalized programs.

A run is a sequence of atomic statement executions.  It counts only when it
is complete: every thread reaches its end and no ``assume`` fails on the way.
A complete run is unsafe when some enabled ``assert`` evaluated to false.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from ..frontend import ast as A
from ..frontend.normalize import (ASSERT, ASSIGN, ASSUME, JOIN, READ, SPAWN, WRITE,
                                  NormalizedProgram)

DEFAULT_NONDET = (0, 1, 2)
DEFAULT_STEP_BOUND = 2_000_000


class StepBoundExceeded(Exception):
    """The search visited more states than allowed; no verdict."""


class ReplayError(Exception):
    """A schedule does not describe an execution of the program."""


def wrap(x: int, width: int) -> int:
    m = 1 << width
    x &= m - 1
    return x - m if x >> (width - 1) else x


def evaluate(e, env, width: int, nondet: dict) -> int:
    """Strict left-to-right evaluation; ``nondet`` maps call-site uid to value."""
    if isinstance(e, A.IntLit):
        return wrap(e.value, width)
    if isinstance(e, A.Var):
        return env(e.name)
    if isinstance(e, A.Nondet):
        return wrap(nondet[e.uid], width)
    if isinstance(e, A.Unary):
        v = evaluate(e.operand, env, width, nondet)
        return wrap(-v, width) if e.op == "-" else int(v == 0)
    a = evaluate(e.left, env, width, nondet)
    b = evaluate(e.right, env, width, nondet)
    op = e.op
    if op == "+":
        return wrap(a + b, width)
    if op == "-":
        return wrap(a - b, width)
    if op == "*":
        return wrap(a * b, width)
    return int({
        "==": a == b, "!=": a != b, "<": a < b, ">": a > b, "<=": a <= b, ">=": a >= b,
        "&&": bool(a) and bool(b), "||": bool(a) or bool(b),
    }[op])


def nondet_sites(e) -> list[int]:
    if isinstance(e, A.Nondet):
        return [e.uid]
    if isinstance(e, A.Unary):
        return nondet_sites(e.operand)
    if isinstance(e, A.Binary):
        return nondet_sites(e.left) + nondet_sites(e.right)
    return []


@dataclass
class Step:
    thread: int
    index: int
    text: str
    writes: dict = field(default_factory=dict)


@dataclass
class Schedule:
    """An interleaved run: executed statements in order plus nondet choices."""

    initial: dict
    steps: list
    nondet: dict = field(default_factory=dict)
    thread_labels: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "initial": dict(self.initial),
            "nondet": {str(k): v for k, v in sorted(self.nondet.items())},
            "steps": [{"step": i, "thread": self.thread_labels.get(s.thread, str(s.thread)),
                       "tid": s.thread, "index": s.index, "statement_text": s.text,
                       "writes": dict(s.writes)} for i, s in enumerate(self.steps)],
        }

    @classmethod
    def from_json(cls, doc) -> "Schedule":
        steps = [Step(s["tid"], s["index"], s["statement_text"], dict(s.get("writes", {})))
                 for s in doc["steps"]]
        labels = {s["tid"]: s["thread"] for s in doc["steps"]}
        return cls(dict(doc.get("initial", {})), steps,
                   {int(k): v for k, v in doc.get("nondet", {}).items()}, labels)


@dataclass
class Safe:
    states: int = 0

    def __bool__(self):
        return True


@dataclass
class Unsafe:
    schedule: Schedule
    states: int = 0

    def __bool__(self):
        return False


class Machine:
    """Slot layout and single-step semantics shared by search and replay."""

    def __init__(self, p: NormalizedProgram, width: int = 8):
        self.p = p
        self.width = width
        self.slot: dict[str, int] = {}
        for v in p.shared:
            self.slot[v] = len(self.slot)
        for s in p.statements():
            for name in [s.target] + [c for c, _ in s.guard]:
                if name is not None and name not in self.slot:
                    self.slot[name] = len(self.slot)
            if s.expr is not None:
                for name in A.expr_vars(s.expr):
                    if name not in self.slot:
                        self.slot[name] = len(self.slot)
        self.stmts = [t.stmts for t in p.threads]
        self.labels = {t.tid: t.label for t in p.threads}

    def initial(self):
        vals = [0] * len(self.slot)
        for v, init in self.p.shared.items():
            vals[self.slot[v]] = wrap(init, self.width)
        pcs = [-1] * len(self.stmts)
        pcs[0] = 0
        return tuple(pcs), tuple(vals), False

    def done(self, pcs, tid) -> bool:
        return pcs[tid] >= len(self.stmts[tid])

    def enabled_guard(self, s, vals) -> bool:
        return all((vals[self.slot[c]] != 0) == pol for c, pol in s.guard)

    def classify(self, pcs, vals, tid):
        """``None`` if blocked/finished, else (stmt, is_global, enabled_guard)."""
        pc = pcs[tid]
        if pc < 0 or pc >= len(self.stmts[tid]):
            return None
        s = self.stmts[tid][pc]
        on = self.enabled_guard(s, vals)
        if on and s.kind == JOIN and not self.done(pcs, s.child):
            return None
        return s, on and s.is_global, on

    def execute(self, pcs, vals, violated, tid, s, on, nondet):
        """Run one statement. Returns (pcs, vals, violated, writes) or None if an assume fails."""
        pcs = list(pcs)
        pcs[tid] += 1
        writes = {}
        if not on:
            return tuple(pcs), vals, violated, writes
        vals = list(vals)
        env = lambda name: vals[self.slot[name]]  # noqa: E731
        k = s.kind
        if k == READ:
            vals[self.slot[s.target]] = vals[self.slot[s.var]]
            writes[s.target] = vals[self.slot[s.target]]
        elif k in (WRITE, ASSIGN):
            dest = s.var if k == WRITE else s.target
            vals[self.slot[dest]] = evaluate(s.expr, env, self.width, nondet)
            writes[dest] = vals[self.slot[dest]]
        elif k == ASSUME:
            if not evaluate(s.expr, env, self.width, nondet):
                return None
        elif k == ASSERT:
            if not evaluate(s.expr, env, self.width, nondet):
                violated = True
        elif k == SPAWN:
            pcs[s.child] = 0
        elif k == JOIN:
            pass
        return tuple(pcs), tuple(vals), violated, writes


def enumerate_schedules(p: NormalizedProgram, step_bound: int = DEFAULT_STEP_BOUND, *,
                        nondet_values=DEFAULT_NONDET, width: int = 8):
    """Search all interleavings (and nondet choices) for a violating complete run.

    Thread-local statements are executed eagerly, lowest thread first; they
    commute with every other thread's steps, so no verdict is lost.
    """
    m = Machine(p, width)
    explored: set = set()
    path: list[Step] = []
    choices: dict[int, int] = {}
    count = 0

    def branches(s, on):
        sites = nondet_sites(s.expr) if (on and s.expr is not None) else []
        if not sites:
            yield {}
            return
        for vals in product(nondet_values, repeat=len(sites)):
            yield dict(zip(sites, vals))

    def dfs(state) -> bool:
        nonlocal count
        if state in explored:
            return False
        count += 1
        if count > step_bound:
            raise StepBoundExceeded(f"more than {step_bound} states")
        pcs, vals, violated = state
        if all(m.done(pcs, t) for t in range(len(pcs))):
            return violated
        local = None
        moves = []
        for t in range(len(pcs)):
            c = m.classify(pcs, vals, t)
            if c is None:
                continue
            if not c[1]:
                local = (t, c)
                break
            moves.append((t, c))
        if local is not None:
            moves = [local]
        for t, (s, _, on) in moves:
            for nd in branches(s, on):
                nxt = m.execute(pcs, vals, violated, t, s, on, nd)
                if nxt is None:
                    continue
                if on:
                    path.append(Step(t, s.index, s.text(), nxt[3]))
                    choices.update(nd)
                if dfs(nxt[:3]):
                    return True
                if on:
                    path.pop()
        explored.add(state)
        return False

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * sum(len(t) for t in m.stmts) + 1000))
    try:
        found = dfs(m.initial())
    finally:
        sys.setrecursionlimit(limit)
    if not found:
        return Safe(count)
    used = {u for st in path for u in _step_sites(m, st)}
    sched = Schedule(dict(p.shared), list(path), {u: choices[u] for u in sorted(used)}, m.labels)
    return Unsafe(sched, count)


def _step_sites(m: Machine, st: Step):
    s = m.stmts[st.thread][st.index]
    return nondet_sites(s.expr) if s.expr is not None else []


@dataclass
class ReplayResult:
    violated: bool
    complete: bool
    failed_asserts: list   # NStmt objects whose assert evaluated to false

    @property
    def ok(self) -> bool:
        """A complete run that violates an assertion."""
        return self.violated and self.complete


def replay(p: NormalizedProgram, schedule: Schedule, *, width: int = 8) -> ReplayResult:
    """Execute ``schedule`` step by step, skipping only guard-disabled statements.

    Raises :class:`ReplayError` if a step is not executable at its position.
    """
    m = Machine(p, width)
    pcs, vals, violated = m.initial()
    failed = []

    def skip_disabled(pcs, vals, tid):
        while True:
            c = m.classify(pcs, vals, tid)
            if c is None or c[2]:
                return pcs
            pcs = m.execute(pcs, vals, False, tid, c[0], False, {})[0]

    for i, st in enumerate(schedule.steps):
        t = st.thread
        if t >= len(pcs) or pcs[t] < 0:
            raise ReplayError(f"step {i}: thread {t} has not been spawned")
        pcs = skip_disabled(pcs, vals, t)
        if pcs[t] != st.index:
            raise ReplayError(f"step {i}: thread {t} is at statement {pcs[t]}, not {st.index}")
        c = m.classify(pcs, vals, t)
        if c is None:
            raise ReplayError(f"step {i}: statement is blocked")
        s = c[0]
        nd = {u: schedule.nondet.get(u, 0) for u in (nondet_sites(s.expr) if s.expr else [])}
        if s.kind == ASSERT:
            env = lambda name: vals[m.slot[name]]  # noqa: E731
            if not evaluate(s.expr, env, width, nd):
                failed.append(s)
        nxt = m.execute(pcs, vals, violated, t, s, True, nd)
        if nxt is None:
            raise ReplayError(f"step {i}: assume({A.format_expr(s.expr)}) fails")
        pcs, vals, violated = nxt[:3]
    for t in range(len(pcs)):
        if pcs[t] >= 0:
            pcs = skip_disabled(pcs, vals, t)
    complete = all(m.done(pcs, t) for t in range(len(pcs)))
    return ReplayResult(violated, complete, failed)


def run_sequential(p: NormalizedProgram, *, width: int = 8, nondet: Optional[dict] = None):
    """Run with the trivial scheduler (always the lowest runnable thread)."""
    m = Machine(p, width)
    state = m.initial()
    steps = []
    while True:
        pcs, vals, violated = state
        for t in range(len(pcs)):
            c = m.classify(pcs, vals, t)
            if c is not None:
                break
        else:
            break
        s, _, on = c
        nxt = m.execute(pcs, vals, violated, t, s, on, nondet or {})
        if nxt is None:
            return None
        if on:
            steps.append(Step(t, s.index, s.text(), nxt[3]))
        state = nxt[:3]
    return Schedule(dict(p.shared), steps, dict(nondet or {}), m.labels), state[2]
