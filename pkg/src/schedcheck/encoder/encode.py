"""SSA events, the scheduling-free abstraction and the exact scheduling constraint."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..frontend import ast as A
from ..frontend.normalize import (ASSERT, ASSIGN, ASSUME, READ, WRITE, NormalizedProgram,
                                  NStmt)
from ..frontend.order import ProgramOrder, program_order
from .bitblast import BitBlaster
from .cnf import ABSTRACTION, CnfFormula

DEFAULT_WIDTH = 8
SEQUENTIAL_AMO_ABOVE = 16


class EncodingError(Exception):
    pass


@dataclass
class Event:
    id: int
    var: str
    kind: str          # "R" or "W"
    thread: int
    ssa: int           # the i of v_i
    stmt: NStmt
    guard: Optional[int] = None
    value: Optional[list] = None

    @property
    def name(self) -> str:
        return f"{self.var}{self.ssa}"


@dataclass
class Link:
    """Read-write link: ``reader`` may read the value written by ``writer``."""

    sel: int
    writer: int
    reader: int
    var: str
    name: str


@dataclass
class EncodedProgram:
    program: NormalizedProgram
    order: ProgramOrder
    width: int
    cnf: CnfFormula
    bb: BitBlaster
    events: list
    links: list
    links_of_reader: dict
    writes_of: dict
    prune_links: bool = True
    guard_of: dict = field(default_factory=dict)      # (tid, index) -> literal
    nondet_bits: dict = field(default_factory=dict)   # nondet uid -> bit-vector
    asserts: list = field(default_factory=list)       # (stmt, guard, holds literal)
    violations: list = field(default_factory=list)    # (violation literal, stmt)
    clocks: dict = field(default_factory=dict)        # event id -> bit-vector
    encoded: set = field(default_factory=set)

    def event_by_name(self, name: str) -> Event:
        for e in self.events:
            if e.name == name:
                return e
        raise KeyError(name)

    def link_by_name(self, name: str) -> Link:
        for lk in self.links:
            if lk.name == name:
                return lk
        raise KeyError(name)

    def literal_names(self) -> dict[int, str]:
        """Guard and link literals that can appear in kernel reasons."""
        names = {}
        for lk in self.links:
            names[lk.sel] = lk.name
        for e in self.events:
            if e.guard is not None and e.guard != self.cnf.true and e.guard not in names:
                names[e.guard] = f"guard({e.name})"
        return names

    @property
    def abstraction_clauses(self) -> int:
        return self.cnf.count(*ABSTRACTION)

    def symbol_extras(self) -> dict:
        return {
            "guards": {e.name: e.guard for e in self.events if e.guard is not None},
            "links": {lk.name: lk.sel for lk in self.links},
            "violations": [v for v, _ in self.violations],
        }


def link_name(var: str, reader_ssa: int, writer_ssa: int) -> str:
    return f"s[{var},{reader_ssa},{writer_ssa}]"


def ssa_transform(p: NormalizedProgram, order: ProgramOrder | None = None, *,
                  width: int = DEFAULT_WIDTH, prune_links: bool = True) -> EncodedProgram:
    """Give every shared access a unique SSA name and enumerate candidate links."""
    order = order if order is not None else program_order(p)
    cnf = CnfFormula()
    bb = BitBlaster(cnf, width)
    counters: dict[str, int] = {}
    events = []
    writes_of: dict[str, list[int]] = {v: [] for v in p.shared}
    for s in p.events:
        counters[s.var] = counters.get(s.var, 0) + 1
        e = Event(s.event, s.var, "R" if s.kind == READ else "W", s.thread, counters[s.var], s)
        events.append(e)
        if e.kind == "W":
            writes_of[s.var].append(e.id)
    links, by_reader = [], {}
    for r in events:
        if r.kind != "R":
            continue
        cands = []
        for w in writes_of[r.var]:
            # a read can never observe a write that program order puts after it
            if prune_links and (r.id, w) in order:
                continue
            w_ev = events[w]
            lk = Link(0, w, r.id, r.var, link_name(r.var, r.ssa, w_ev.ssa))
            lk.sel = cnf.new_var(lk.name)
            cands.append(lk)
        if not cands:
            raise EncodingError(f"read {r.name} has no candidate writer")
        by_reader[r.id] = cands
        links.extend(cands)
    return EncodedProgram(p, order, width, cnf, bb, events, links, by_reader, writes_of,
                          prune_links)


# -- abstraction ---------------------------------------------------------------

def _eval(ep: EncodedProgram, env: dict, e) -> list[int]:
    bb = ep.bb
    if isinstance(e, A.IntLit):
        return bb.const(e.value)
    if isinstance(e, A.Var):
        return env.get(e.name) or bb.const(0)
    if isinstance(e, A.Nondet):
        bits = ep.nondet_bits.get(e.uid)
        if bits is None:
            bits = ep.nondet_bits[e.uid] = bb.fresh(f"nondet{e.uid}")
        return bits
    if isinstance(e, A.Unary):
        v = _eval(ep, env, e.operand)
        if e.op == "-":
            return bb.neg(v)
        return bb.from_bool(-bb.truth(v))
    a = _eval(ep, env, e.left)
    b = _eval(ep, env, e.right)
    op = e.op
    if op == "+":
        return bb.add(a, b)
    if op == "-":
        return bb.sub(a, b)
    if op == "*":
        return bb.mul(a, b)
    if op == "==":
        return bb.from_bool(bb.eq(a, b))
    if op == "!=":
        return bb.from_bool(-bb.eq(a, b))
    if op == "<":
        return bb.from_bool(bb.slt(a, b))
    if op == ">":
        return bb.from_bool(bb.slt(b, a))
    if op == "<=":
        return bb.from_bool(-bb.slt(b, a))
    if op == ">=":
        return bb.from_bool(-bb.slt(a, b))
    if op == "&&":
        return bb.from_bool(bb.and_(bb.truth(a), bb.truth(b)))
    if op == "||":
        return bb.from_bool(bb.or_(bb.truth(a), bb.truth(b)))
    raise EncodingError(f"unknown operator {op}")


def _encode_threads(ep: EncodedProgram) -> None:
    cnf, bb = ep.cnf, ep.bb
    for t in ep.program.threads:
        env: dict[str, list[int]] = {}
        truth: dict[str, int] = {}
        guards: dict[tuple, int] = {(): cnf.true}
        for s in t.stmts:
            g = guards.get(s.guard)
            if g is None:
                g = bb.and_(*(truth[c] if pol else -truth[c] for c, pol in s.guard))
                guards[s.guard] = g
            ep.guard_of[(t.tid, s.index)] = g
            if s.kind == READ:
                ev = ep.events[s.event]
                ev.guard = g
                ev.value = bb.fresh(ev.name)
                env[s.target] = bb.mux_bv(g, ev.value, env.get(s.target) or bb.const(0))
            elif s.kind == WRITE:
                ev = ep.events[s.event]
                ev.guard = g
                if s.is_init:
                    ev.value = bb.fresh(ev.name)
                    for bit, want in zip(ev.value, bb.const(s.expr.value)):
                        cnf.add([bit if want == cnf.true else -bit], "init")
                else:
                    ev.value = _eval(ep, env, s.expr)
            elif s.kind == ASSIGN:
                val = _eval(ep, env, s.expr)
                env[s.target] = bb.mux_bv(g, val, env.get(s.target) or bb.const(0))
                if s.target.startswith("$c."):
                    truth[s.target] = bb.truth(env[s.target])
            elif s.kind == ASSUME:
                holds = bb.truth(_eval(ep, env, s.expr))
                if g != cnf.true or holds != cnf.true:
                    cnf.add([-g, holds])
            elif s.kind == ASSERT:
                holds = bb.truth(_eval(ep, env, s.expr))
                ep.asserts.append((s, g, holds))


def _exactly_one_links(ep: EncodedProgram, reader_guard: int, sels: list[int]) -> None:
    cnf = ep.cnf
    alo = list(sels) if reader_guard == cnf.true else [-reader_guard] + list(sels)
    cnf.add(alo, "zeta")
    if len(sels) <= SEQUENTIAL_AMO_ABOVE:
        for i in range(len(sels)):
            for j in range(i + 1, len(sels)):
                cnf.add([-sels[i], -sels[j]], "zeta")
        return
    # sequential counter encoding for long candidate lists
    prefix = [cnf.new_var() for _ in sels[:-1]]
    for i, s in enumerate(sels):
        if i < len(prefix):
            cnf.add([-s, prefix[i]], "zeta")
        if i > 0:
            cnf.add([-prefix[i - 1], -s], "zeta")
            if i < len(prefix):
                cnf.add([-prefix[i - 1], prefix[i]], "zeta")


def encode_abstraction(ep: EncodedProgram) -> CnfFormula:
    """Emit init values, per-thread transitions and read-value choice (no scheduling)."""
    if "abstraction" in ep.encoded:
        return ep.cnf
    cnf = ep.cnf
    cnf.current = "rho"
    _encode_threads(ep)
    T = cnf.true
    for r_id, links in ep.links_of_reader.items():
        r = ep.events[r_id]
        for lk in links:
            w = ep.events[lk.writer]
            s = lk.sel
            for rb, wb in zip(r.value, w.value):
                if wb == T:
                    cnf.add([-s, rb], "zeta")
                elif wb == -T:
                    cnf.add([-s, -rb], "zeta")
                else:
                    cnf.add([-s, -rb, wb], "zeta")
                    cnf.add([-s, rb, -wb], "zeta")
            if w.guard != T:
                cnf.add([-s, w.guard], "zeta")
            if r.guard != T:
                cnf.add([-s, r.guard], "zeta")
        _exactly_one_links(ep, r.guard, [lk.sel for lk in links])
    ep.encoded.add("abstraction")
    return cnf


def encode_error(ep: EncodedProgram) -> CnfFormula:
    """Emit the error states: some reached assertion evaluates to false."""
    if "err" in ep.encoded:
        return ep.cnf
    encode_abstraction(ep)
    cnf = ep.cnf
    disj = []
    for k, (stmt, g, holds) in enumerate(ep.asserts):
        if g == -cnf.true or holds == cnf.true:
            continue
        v = cnf.new_var(f"violation{k}@{stmt.pos}" if stmt.pos else f"violation{k}")
        cnf.add([-v, g], "err")
        cnf.add([-v, -holds], "err")
        ep.violations.append((v, stmt))
        disj.append(v)
    cnf.add(disj, "err")  # empty when no assertion can fail
    ep.encoded.add("err")
    return cnf


def clock_width(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def encode_scheduling(ep: EncodedProgram) -> CnfFormula:
    """Emit the exact scheduling constraint over per-event clock bit-vectors."""
    if "xi" in ep.encoded:
        return ep.cnf
    encode_abstraction(ep)
    cnf, bb = ep.cnf, ep.bb
    cnf.current = "xi"
    width = clock_width(len(ep.events))
    for e in ep.events:
        ep.clocks[e.id] = bb.fresh(f"clk({e.name})", width)
    lt_cache: dict[tuple[int, int], int] = {}

    def lt(a: int, b: int) -> int:
        key = (a, b)
        if key not in lt_cache:
            lt_cache[key] = bb.ult(ep.clocks[a], ep.clocks[b])
        return lt_cache[key]

    for a, b in ep.order.reduction():
        cnf.add([lt(a, b)])
    order = ep.order
    for lk in ep.links:
        w, r = lk.writer, lk.reader
        cnf.add([-lk.sel, lt(w, r)])
        for w2 in ep.writes_of[lk.var]:
            if w2 == w:
                continue
            # already forced by program order: nothing to add
            if (w2, w) in order or (r, w2) in order:
                continue
            g2 = ep.events[w2].guard
            clause = [-lk.sel, lt(w2, w), lt(r, w2)]
            if g2 != cnf.true:
                clause.insert(1, -g2)
            cnf.add(clause)
    cnf.current = "rho"
    ep.encoded.add("xi")
    return cnf


def encode(p: NormalizedProgram, *, width: int = DEFAULT_WIDTH, prune_links: bool = True,
           scheduling: bool = False) -> EncodedProgram:
    """Convenience: SSA transform plus abstraction and error encoding."""
    ep = ssa_transform(p, width=width, prune_links=prune_links)
    encode_abstraction(ep)
    encode_error(ep)
    if scheduling:
        encode_scheduling(ep)
    return ep


# -- model decoding ------------------------------------------------------------

def lit_value(model, lit: int) -> bool:
    v = model[abs(lit)]
    return v if lit > 0 else not v


def bv_value(model, bits, signed: bool = True) -> int:
    x = 0
    for i, b in enumerate(bits):
        if lit_value(model, b):
            x |= 1 << i
    if signed and x >> (len(bits) - 1) & 1:
        x -= 1 << len(bits)
    return x


def decode(ep: EncodedProgram, model) -> tuple[list[int], list[Link]]:
    """Active events and selected links of a model of the abstraction."""
    active = [e.id for e in ep.events if lit_value(model, e.guard)]
    chosen = [lk for lk in ep.links if lit_value(model, lk.sel)]
    return active, chosen
