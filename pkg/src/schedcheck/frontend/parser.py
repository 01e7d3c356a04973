"""Recursive-descent parser for MTL with declaration checking."""

from __future__ import annotations

import re

from . import ast as A
from .errors import DuplicateDeclaration, FrontendError, MTLSyntaxError, UndeclaredIdentifier

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*<>!=(){};])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {
    "shared", "int", "thread", "main", "local", "if", "else", "while",
    "assert", "assume", "spawn", "join", "nondet",
}

# binding power per binary operator; all left-associative
_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6,
}


class Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.pos})"


def tokenize(source: str) -> list[Token]:
    tokens = []
    i, line, line_start = 0, 1, 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise MTLSyntaxError(f"unexpected character {source[i]!r}", A.Pos(line, i - line_start + 1))
        kind = m.lastgroup
        text = m.group()
        pos = A.Pos(line, i - line_start + 1)
        if kind == "ident" and text in KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, pos))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = i + text.rfind("\n") + 1
        i = m.end()
    tokens.append(Token("eof", "", A.Pos(line, i - line_start + 1)))
    return tokens


class _Scope:
    """Block-structured local scope for one thread body."""

    def __init__(self, shared: set[str]):
        self.shared = shared
        self.frames: list[dict[str, str]] = [{}]  # name -> "local" | "handle"
        self.joined: set[str] = set()

    def push(self):
        self.frames.append({})

    def pop(self):
        self.frames.pop()

    def lookup(self, name):
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        if name in self.shared:
            return "shared"
        return None

    def declare(self, name, kind, pos):
        if name in self.shared:
            raise DuplicateDeclaration(f"local '{name}' shadows a shared variable", pos)
        if name in self.frames[-1]:
            raise DuplicateDeclaration(f"'{name}' is already declared in this block", pos)
        self.frames[-1][name] = kind


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0
        self.shared: dict[str, A.SharedDecl] = {}
        self.spawn_targets: list[tuple[str, A.Pos]] = []

    # -- token helpers -----------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("op", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.kind in ("op", "kw") and t.text == text:
            return self.advance()
        found = t.text or "end of input"
        raise MTLSyntaxError(f"expected '{text}', found '{found}'", t.pos)

    def ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            found = t.text or "end of input"
            raise MTLSyntaxError(f"expected identifier, found '{found}'", t.pos)
        return self.advance()

    # -- grammar -----------------------------------------------------------
    def program(self) -> A.Program:
        decls = []
        while self.at("shared"):
            decls.append(self.shared_decl())
        threads: dict[str, tuple] = {}
        bodies = []
        # Thread bodies are parsed after every header is known so spawn
        # targets may be defined in any order.
        while self.at("thread"):
            self.advance()
            name = self.ident()
            if name.text in threads or name.text in self.shared:
                raise DuplicateDeclaration(f"thread '{name.text}' declared twice", name.pos)
            threads[name.text] = ()
            bodies.append((name.text, self.block(_Scope(set(self.shared)), top=True)))
        if not self.at("main"):
            t = self.peek()
            raise MTLSyntaxError(f"expected 'thread' or 'main', found '{t.text or 'end of input'}'", t.pos)
        self.advance()
        main = self.block(_Scope(set(self.shared)), top=True)
        if self.peek().kind != "eof":
            t = self.peek()
            raise MTLSyntaxError(f"unexpected '{t.text}' after main", t.pos)
        for name, body in bodies:
            threads[name] = body
        for target, pos in self.spawn_targets:
            if target not in threads:
                raise UndeclaredIdentifier(f"spawn of undefined thread '{target}'", pos)
        return A.Program(tuple(decls), threads, main)

    def shared_decl(self) -> A.SharedDecl:
        start = self.expect("shared")
        self.expect("int")
        name = self.ident()
        if name.text in self.shared:
            raise DuplicateDeclaration(f"shared variable '{name.text}' declared twice", name.pos)
        init = 0
        if self.at("="):
            self.advance()
            neg = False
            if self.at("-"):
                self.advance()
                neg = True
            t = self.peek()
            if t.kind != "int":
                raise MTLSyntaxError("shared initializer must be an integer constant", t.pos)
            self.advance()
            init = -int(t.text) if neg else int(t.text)
        self.expect(";")
        d = A.SharedDecl(name.text, init, start.pos)
        self.shared[name.text] = d
        return d

    def block(self, scope: _Scope, top: bool = False) -> tuple:
        self.expect("{")
        if not top:
            scope.push()
        stmts = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise MTLSyntaxError("unterminated block", self.peek().pos)
            stmts.append(self.statement(scope, top))
        self.expect("}")
        if not top:
            scope.pop()
        return tuple(stmts)

    def statement(self, scope: _Scope, top: bool):
        t = self.peek()
        if self.at("local"):
            self.advance()
            self.expect("int")
            name = self.ident()
            value = None
            if self.at("="):
                self.advance()
                value = self.expr(scope)
            self.expect(";")
            scope.declare(name.text, "local", name.pos)
            return A.LocalDecl(name.text, value, t.pos)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr(scope)
            self.expect(")")
            then = self.block(scope)
            orelse = ()
            if self.at("else"):
                self.advance()
                if self.at("if"):
                    orelse = (self.statement(scope, False),)
                else:
                    orelse = self.block(scope)
            return A.If(cond, then, orelse, t.pos)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr(scope)
            self.expect(")")
            return A.While(cond, self.block(scope), t.pos)
        if self.at("assert") or self.at("assume"):
            kw = self.advance().text
            self.expect("(")
            cond = self.expr(scope)
            self.expect(")")
            self.expect(";")
            return A.Assert(cond, t.pos) if kw == "assert" else A.Assume(cond, t.pos)
        if self.at("join"):
            self.advance()
            h = self.ident()
            self.expect(";")
            if not top:
                raise FrontendError("join must appear at the top level of a thread body", t.pos)
            kind = scope.lookup(h.text)
            if kind is None:
                raise UndeclaredIdentifier(f"join of undeclared handle '{h.text}'", h.pos)
            if kind != "handle":
                raise FrontendError(f"'{h.text}' is not a thread handle", h.pos)
            if h.text in scope.joined:
                raise FrontendError(f"handle '{h.text}' joined twice", h.pos)
            scope.joined.add(h.text)
            return A.Join(h.text, t.pos)
        if t.kind == "ident":
            name = self.advance()
            self.expect("=")
            if self.at("spawn"):
                self.advance()
                target = self.ident()
                self.expect(";")
                if not top:
                    raise FrontendError("spawn must appear at the top level of a thread body", t.pos)
                kind = scope.lookup(name.text)
                if kind is None:
                    scope.declare(name.text, "handle", name.pos)
                else:
                    raise DuplicateDeclaration(f"handle '{name.text}' is already declared", name.pos)
                self.spawn_targets.append((target.text, target.pos))
                return A.Spawn(name.text, target.text, t.pos)
            kind = scope.lookup(name.text)
            if kind is None:
                raise UndeclaredIdentifier(f"assignment to undeclared '{name.text}'", name.pos)
            if kind == "handle":
                raise FrontendError(f"cannot assign to thread handle '{name.text}'", name.pos)
            value = self.expr(scope)
            self.expect(";")
            return A.Assign(name.text, value, t.pos)
        raise MTLSyntaxError(f"unexpected '{t.text or 'end of input'}'", t.pos)

    def expr(self, scope: _Scope, min_prec: int = 1):
        left = self.unary(scope)
        while True:
            t = self.peek()
            prec = _PRECEDENCE.get(t.text) if t.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            self.advance()
            right = self.expr(scope, prec + 1)
            left = A.Binary(t.text, left, right, t.pos)

    def unary(self, scope: _Scope):
        t = self.peek()
        if self.at("-") or self.at("!"):
            self.advance()
            operand = self.unary(scope)
            if t.text == "-" and isinstance(operand, A.IntLit):
                return A.IntLit(-operand.value, t.pos)
            return A.Unary(t.text, operand, t.pos)
        return self.primary(scope)

    def primary(self, scope: _Scope):
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return A.IntLit(int(t.text), t.pos)
        if self.at("nondet"):
            self.advance()
            self.expect("(")
            self.expect(")")
            return A.Nondet(pos=t.pos)
        if self.at("("):
            self.advance()
            e = self.expr(scope)
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            kind = scope.lookup(t.text)
            if kind is None:
                raise UndeclaredIdentifier(f"undeclared identifier '{t.text}'", t.pos)
            if kind == "handle":
                raise FrontendError(f"thread handle '{t.text}' used in an expression", t.pos)
            return A.Var(t.text, t.pos)
        raise MTLSyntaxError(f"unexpected '{t.text or 'end of input'}' in expression", t.pos)


def parse(source: str) -> A.Program:
    """Parse MTL text into a checked :class:`Program`."""
    return Parser(source).program()


def parse_file(path) -> A.Program:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
