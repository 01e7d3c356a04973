"""Exact feasibility check of an event order graph with integer clocks.

Each event gets an unsigned bit-vector clock.  Program order, read-from and
"no intervening write" constraints are conjoined, each one switched on by a
private assumption variable that stands for the guard or link literal it
depends on.  A satisfying assignment yields a total order; an unsatisfiable
core maps back to guard and link literals of the abstraction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .encoder.bitblast import BitBlaster
from .encoder.cnf import CnfFormula
from .encoder.encode import bv_value, clock_width
from .eog import ContractViolation, EventOrderGraph
from .sat import Solver


@dataclass
class Feasible:
    order: list          # event indices, earliest first
    clocks: dict

    def __bool__(self):
        return True


@dataclass
class Infeasible:
    core: list           # guard / link literals of the abstraction

    def __bool__(self):
        return False


def validate_exact(g: EventOrderGraph, *, seed: int = 0):
    """Decide whether the events of ``g`` admit a consistent total order."""
    n = len(g.events)
    cnf = CnfFormula()
    bb = BitBlaster(cnf, clock_width(n))
    clk = [bb.fresh(f"clk_{e.name}") for e in g.events]
    assume: dict[int, int] = {}

    def A(lit):
        if lit is None:
            return None
        if lit not in assume:
            assume[lit] = cnf.new_var(f"A[{g.name_of(lit)}]")
        return assume[lit]

    lt_cache: dict = {}

    def lt(a, b):
        if (a, b) not in lt_cache:
            lt_cache[(a, b)] = bb.ult(clk[a], clk[b])
        return lt_cache[(a, b)]

    def guarded(conds, lits):
        cnf.add([-c for c in conds if c is not None] + lits, "xi")

    for e in g.events:
        A(e.guard)
    for a, b in g.po_reduction():
        guarded([A(g.events[a].guard), A(g.events[b].guard)], [lt(a, b)])
    for e in g.rf:
        s = A(e.sel)
        guarded([s], [lt(e.writer, e.reader)])
        for w2 in g.writes_of(g.events[e.writer].var):
            if w2 == e.writer:
                continue
            guarded([s, A(g.events[w2].guard)], [lt(w2, e.writer), lt(e.reader, w2)])

    solver = Solver(seed=seed)
    solver.reserve(cnf.nvars)
    solver.add_clauses(cnf.clauses())
    back = {v: lit for lit, v in assume.items()}
    res = solver.solve(list(assume.values()))
    if res:
        model = res.model
        clocks = {i: bv_value(model, clk[i], signed=False) for i in range(n)}
        order = sorted(range(n), key=lambda i: (clocks[i], i))
        return Feasible(order, clocks)
    return Infeasible([back[v] for v in res.core])


def refine_from_core(core) -> list[list[int]]:
    """Blocking clause for an infeasibility core."""
    if not core:
        raise ContractViolation("empty infeasibility core: program order alone is cyclic")
    return [sorted((-x for x in set(core)), key=lambda x: (abs(x), x))]


def order_respects(g: EventOrderGraph, order) -> bool:
    """True if ``order`` (event indices) satisfies program order and read-from semantics."""
    pos = {e: i for i, e in enumerate(order)}
    if sorted(pos) != list(range(len(g.events))):
        return False
    if any(pos[a] >= pos[b] for a, b in g.po):
        return False
    for e in g.rf:
        w, r = pos[e.writer], pos[e.reader]
        if w >= r:
            return False
        for w2 in g.writes_of(g.events[e.writer].var):
            if w2 != e.writer and w < pos[w2] < r:
                return False
    return True
