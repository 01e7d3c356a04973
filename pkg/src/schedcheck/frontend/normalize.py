"""Lowering of loop-free MTL into guarded global/local statements."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast as A

READ, WRITE, ASSIGN, ASSERT, ASSUME, SPAWN, JOIN = (
    "read", "write", "assign", "assert", "assume", "spawn", "join")


@dataclass
class NStmt:
    """One normalized statement.

    ``read`` and ``write`` statements are global (exactly one shared access);
    everything else touches locals only.  ``guard`` is a conjunction of
    ``(cond_local, polarity)`` pairs; condition locals are assigned once.
    """

    kind: str
    thread: int
    index: int
    guard: tuple
    target: Optional[str] = None
    var: Optional[str] = None
    expr: Optional[A.Expr] = None
    child: Optional[int] = None
    event: Optional[int] = None
    is_init: bool = False
    pos: Optional[A.Pos] = None

    @property
    def is_global(self) -> bool:
        return self.kind in (READ, WRITE)

    def text(self) -> str:
        k = self.kind
        if k == READ:
            return f"{self.target} = {self.var}"
        if k in (WRITE, ASSIGN):
            lhs = self.var if k == WRITE else self.target
            return f"{lhs} = {A.format_expr(self.expr)}"
        if k in (ASSERT, ASSUME):
            return f"{k}({A.format_expr(self.expr)})"
        if k == SPAWN:
            return f"spawn #{self.child}"
        return f"join #{self.child}"


@dataclass
class ThreadInstance:
    tid: int
    func: str
    parent: Optional[int]
    stmts: list = field(default_factory=list)

    @property
    def label(self) -> str:
        return self.func if self.tid == 0 else f"{self.func}#{self.tid}"


@dataclass
class NormalizedProgram:
    shared: dict            # name -> initial value
    threads: list           # ThreadInstance, tid == index, main is 0
    events: list            # event id -> global NStmt
    nondet_count: int = 0

    def statements(self):
        for t in self.threads:
            yield from t.stmts

    def asserts(self):
        return [s for s in self.statements() if s.kind == ASSERT]


def _has_shared(e, shared) -> bool:
    return any(v in shared for v in A.expr_vars(e))


class _Normalizer:
    def __init__(self, program: A.Program):
        self.src = program
        self.shared = {d.name: d.init for d in program.shared}
        self.threads: list[ThreadInstance] = []
        self.nondets = 0
        self.fresh = 0

    def new_local(self, prefix: str) -> str:
        self.fresh += 1
        return f"{prefix}.{self.fresh}"

    def run(self) -> NormalizedProgram:
        main = ThreadInstance(0, "main", None)
        self.threads.append(main)
        for d in self.src.shared:
            self.emit(main, WRITE, (), var=d.name, expr=A.IntLit(d.init), is_init=True, pos=d.pos)
        self.body(main, self.src.main, (), [{}], {})
        events = []
        self._number_events(main, events)
        return NormalizedProgram(self.shared, self.threads, events, self.nondets)

    def _number_events(self, t: ThreadInstance, events: list):
        # Depth-first over spawn points: a spawned thread's events are numbered
        # right where it is created, giving per-variable SSA indices that follow
        # a sequential reading of the program.
        for s in t.stmts:
            if s.is_global:
                s.event = len(events)
                events.append(s)
            elif s.kind == SPAWN:
                self._number_events(self.threads[s.child], events)

    def emit(self, t, kind, guard, **kw):
        s = NStmt(kind, t.tid, len(t.stmts), guard, **kw)
        t.stmts.append(s)
        return s

    # -- expressions -------------------------------------------------------
    def lower(self, t, e, guard, scope):
        """Hoist shared reads of ``e`` (left to right) and rename locals."""
        if isinstance(e, A.IntLit):
            return e
        if isinstance(e, A.Nondet):
            self.nondets += 1
            return A.Nondet(self.nondets - 1, e.pos)
        if isinstance(e, A.Var):
            if e.name in self.shared:
                tmp = self.new_local("$r")
                self.emit(t, READ, guard, target=tmp, var=e.name, pos=e.pos)
                return A.Var(tmp, e.pos)
            return A.Var(self.resolve(scope, e.name), e.pos)
        if isinstance(e, A.Unary):
            return A.Unary(e.op, self.lower(t, e.operand, guard, scope), e.pos)
        left = self.lower(t, e.left, guard, scope)
        right = self.lower(t, e.right, guard, scope)
        return A.Binary(e.op, left, right, e.pos)

    @staticmethod
    def resolve(scope, name):
        for frame in reversed(scope):
            if name in frame:
                return frame[name]
        raise KeyError(name)  # parser guarantees declaration

    # -- statements --------------------------------------------------------
    def body(self, t, stmts, guard, scope, handles):
        for s in stmts:
            self.stmt(t, s, guard, scope, handles)

    def assign_local(self, t, target, value, guard, scope, pos):
        if isinstance(value, A.Var) and value.name in self.shared:
            self.emit(t, READ, guard, target=target, var=value.name, pos=pos)
        else:
            self.emit(t, ASSIGN, guard, target=target, expr=self.lower(t, value, guard, scope), pos=pos)

    def stmt(self, t, s, guard, scope, handles):
        if isinstance(s, A.LocalDecl):
            name = self.new_local(s.name)
            value = s.value if s.value is not None else A.IntLit(0)
            self.assign_local(t, name, value, guard, scope, s.pos)
            scope[-1][s.name] = name
        elif isinstance(s, A.Assign):
            if s.target in self.shared:
                value = self.lower(t, s.value, guard, scope)
                self.emit(t, WRITE, guard, var=s.target, expr=value, pos=s.pos)
            else:
                self.assign_local(t, self.resolve(scope, s.target), s.value, guard, scope, s.pos)
        elif isinstance(s, A.If):
            cond = self.lower(t, s.cond, guard, scope)
            c = self.new_local("$c")
            self.emit(t, ASSIGN, guard, target=c, expr=cond, pos=s.pos)
            scope.append({})
            self.body(t, s.then, guard + ((c, True),), scope, handles)
            scope.pop()
            if s.orelse:
                scope.append({})
                self.body(t, s.orelse, guard + ((c, False),), scope, handles)
                scope.pop()
        elif isinstance(s, (A.Assert, A.Assume)):
            kind = ASSERT if isinstance(s, A.Assert) else ASSUME
            self.emit(t, kind, guard, expr=self.lower(t, s.cond, guard, scope), pos=s.pos)
        elif isinstance(s, A.Spawn):
            child = ThreadInstance(len(self.threads), s.thread, t.tid)
            self.threads.append(child)
            handles[s.handle] = child.tid
            self.emit(t, SPAWN, guard, child=child.tid, pos=s.pos)
            self.body(child, self.src.threads[s.thread], (), [{}], {})
        elif isinstance(s, A.Join):
            self.emit(t, JOIN, guard, child=handles[s.handle], pos=s.pos)
        else:  # pragma: no cover - unwinding removes loops
            raise TypeError(f"cannot normalize {type(s).__name__}; unwind loops first")


def normalize(program: A.Program) -> NormalizedProgram:
    """Split a loop-free program into guarded global and local statements."""
    return _Normalizer(program).run()


def shared_access_count(s: NStmt, shared) -> int:
    """Number of shared-variable accesses performed by ``s``."""
    n = 1 if s.kind in (READ, WRITE) else 0
    if s.expr is not None:
        n += sum(1 for v in A.expr_vars(s.expr) if v in shared)
    return n
