"""Syntax tree for the mini threaded language (MTL)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

BINARY_OPS = ("+", "-", "*", "==", "!=", "<", "<=", ">", ">=", "&&", "||")
UNARY_OPS = ("-", "!")


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# -- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Nondet:
    # Distinct call sites get distinct ids once the program is normalized.
    uid: int = -1
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Optional[Pos] = field(default=None, compare=False)


Expr = Union[IntLit, Var, Nondet, Unary, Binary]


# -- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class LocalDecl:
    name: str
    value: Optional[Expr]
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: tuple = ()
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Assert:
    cond: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Assume:
    cond: Expr
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Spawn:
    handle: str
    thread: str
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Join:
    handle: str
    pos: Optional[Pos] = field(default=None, compare=False)


Stmt = Union[Assign, LocalDecl, If, While, Assert, Assume, Spawn, Join]


@dataclass(frozen=True)
class SharedDecl:
    name: str
    init: int = 0
    pos: Optional[Pos] = field(default=None, compare=False)


@dataclass(frozen=True)
class Program:
    shared: tuple  # of SharedDecl, declaration order
    threads: dict  # thread name -> tuple of Stmt
    main: tuple

    @property
    def shared_names(self) -> set[str]:
        return {d.name for d in self.shared}

    def bodies(self):
        """Yield ``(name, body)`` for every thread function, main first."""
        yield "main", self.main
        yield from self.threads.items()


# -- helpers ---------------------------------------------------------------

def expr_vars(e: Expr) -> list[str]:
    """Variable occurrences of ``e`` in strict left-to-right order."""
    if isinstance(e, Var):
        return [e.name]
    if isinstance(e, Unary):
        return expr_vars(e.operand)
    if isinstance(e, Binary):
        return expr_vars(e.left) + expr_vars(e.right)
    return []


def format_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Nondet):
        return "nondet()"
    if isinstance(e, Unary):
        inner = format_expr(e.operand)
        if isinstance(e.operand, Binary):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    left, right = format_expr(e.left), format_expr(e.right)
    if isinstance(e.left, Binary):
        left = f"({left})"
    if isinstance(e.right, Binary):
        right = f"({right})"
    return f"{left} {e.op} {right}"


def format_block(body, indent: int = 0) -> str:
    """Pretty-print statements back to MTL source."""
    pad = "  " * indent
    out = []
    for s in body:
        if isinstance(s, Assign):
            out.append(f"{pad}{s.target} = {format_expr(s.value)};")
        elif isinstance(s, LocalDecl):
            init = f" = {format_expr(s.value)}" if s.value is not None else ""
            out.append(f"{pad}local int {s.name}{init};")
        elif isinstance(s, If):
            out.append(f"{pad}if ({format_expr(s.cond)}) {{")
            out.append(format_block(s.then, indent + 1))
            if s.orelse:
                out.append(f"{pad}}} else {{")
                out.append(format_block(s.orelse, indent + 1))
            out.append(f"{pad}}}")
        elif isinstance(s, While):
            out.append(f"{pad}while ({format_expr(s.cond)}) {{")
            out.append(format_block(s.body, indent + 1))
            out.append(f"{pad}}}")
        elif isinstance(s, Assert):
            out.append(f"{pad}assert({format_expr(s.cond)});")
        elif isinstance(s, Assume):
            out.append(f"{pad}assume({format_expr(s.cond)});")
        elif isinstance(s, Spawn):
            out.append(f"{pad}{s.handle} = spawn {s.thread};")
        elif isinstance(s, Join):
            out.append(f"{pad}join {s.handle};")
    return "\n".join(line for line in out if line)


def format_program(p: Program) -> str:
    lines = [f"shared int {d.name} = {d.init};" for d in p.shared]
    for name, body in p.threads.items():
        lines.append(f"thread {name} {{\n{format_block(body, 1)}\n}}")
    lines.append(f"main {{\n{format_block(p.main, 1)}\n}}")
    return "\n".join(lines) + "\n"
