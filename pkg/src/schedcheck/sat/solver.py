"""Incremental CDCL SAT solver with assumptions and assumption cores.

Literals at the API are DIMACS integers (``v`` / ``-v`` for ``v >= 1``).
Internally a literal is coded as ``2*v + sign`` so negation is ``code ^ 1``
and value lookup is a single list index.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

_UNDEF = 0
_TRUE = 1
_FALSE = -1


@dataclass
class Sat:
    model: list  # model[v] is the value of variable v; index 0 unused

    def __bool__(self) -> bool:
        return True

    def value(self, lit: int) -> bool:
        v = self.model[abs(lit)]
        return v if lit > 0 else not v


@dataclass
class Unsat:
    core: list = field(default_factory=list)  # subset of the assumptions

    def __bool__(self) -> bool:
        return False


@dataclass
class SolverStats:
    solves: int = 0
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0
    learnt_clauses: int = 0


def _code(lit: int) -> int:
    return (lit << 1) if lit > 0 else ((-lit) << 1) | 1


def _lit(code: int) -> int:
    return -(code >> 1) if code & 1 else code >> 1


def luby(y: float, x: int) -> float:
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


class Solver:
    """CDCL with two watched literals, VSIDS, phase saving and Luby restarts.

    Clauses persist across :meth:`solve` calls.  Solving under assumptions
    places them as the first decisions; when one of them is refuted the
    final-conflict analysis returns the subset of assumptions responsible.
    """

    restart_base = 100
    var_decay = 0.95

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)
        self.nvars = 0
        self.ok = True
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self._lbd: dict[int, int] = {}
        self.watches: list[list] = [[], []]
        self.vals: list[int] = [_UNDEF, _UNDEF]
        self.level: list[int] = [0]
        self.reason: list = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [1]  # saved sign bit per var (1 = negative)
        self.seen: list[bool] = [False]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.heap: list = []
        self.max_learnts = 4000.0
        self.stats = SolverStats()
        self.num_original = 0

    # -- variables ----------------------------------------------------------
    def new_var(self) -> int:
        self.nvars += 1
        self.watches.extend(([], []))
        self.vals.extend((_UNDEF, _UNDEF))
        self.level.append(0)
        self.reason.append(None)
        act = self.rng.random() * 1e-5
        self.activity.append(act)
        self.phase.append(1)
        self.seen.append(False)
        heapq.heappush(self.heap, (-act, self.nvars))
        return self.nvars

    def reserve(self, n: int) -> None:
        while self.nvars < n:
            self.new_var()

    # -- clause database ----------------------------------------------------
    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a clause permanently.  Returns ``False`` once the database is unsat."""
        lits = list(lits)
        self.num_original += 1
        if not self.ok:
            return False
        if lits:
            self.reserve(max(abs(x) for x in lits))
        self._cancel_until(0)
        vals = self.vals
        out, present = [], set()
        for x in lits:
            c = _code(x)
            if c ^ 1 in present or vals[c] == _TRUE:
                return True  # tautology or already satisfied at the root
            if c in present or vals[c] == _FALSE:
                continue
            present.add(c)
            out.append(c)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        self.clauses.append(out)
        self.watches[out[0] ^ 1].append(out)
        self.watches[out[1] ^ 1].append(out)
        return True

    def add_clauses(self, clauses: Iterable[Iterable[int]]) -> bool:
        for c in clauses:
            self.add_clause(c)
        return self.ok

    # -- trail --------------------------------------------------------------
    def _enqueue(self, code: int, reason) -> None:
        v = code >> 1
        self.vals[code] = _TRUE
        self.vals[code ^ 1] = _FALSE
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(code)

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        vals, phase, heap, act = self.vals, self.phase, self.heap, self.activity
        start = self.trail_lim[lvl]
        for i in range(len(self.trail) - 1, start - 1, -1):
            c = self.trail[i]
            v = c >> 1
            vals[c] = _UNDEF
            vals[c ^ 1] = _UNDEF
            self.reason[v] = None
            phase[v] = c & 1
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, start)

    def _propagate(self):
        vals, watches, trail = self.vals, self.watches, self.trail
        enqueue = self._enqueue
        props = 0
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            props += 1
            false_lit = p ^ 1
            ws = watches[p]  # clauses watching false_lit are filed under p
            keep = []
            n = len(ws)
            i = 0
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if vals[first] == _TRUE:
                    keep.append(c)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if vals[lk] != _FALSE:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk ^ 1].append(c)
                        break
                else:
                    keep.append(c)
                    if vals[first] == _FALSE:
                        keep.extend(ws[i:])
                        watches[p] = keep
                        self.qhead = len(trail)
                        self.stats.propagations += props
                        return c
                    enqueue(first, c)
            watches[p] = keep
        self.stats.propagations += props
        return None

    # -- heuristics ---------------------------------------------------------
    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for i in range(1, self.nvars + 1):
                act[i] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[i], i) for i in range(1, self.nvars + 1)
                         if self.vals[i << 1] == _UNDEF]
            heapq.heapify(self.heap)
        elif self.vals[v << 1] == _UNDEF:
            heapq.heappush(self.heap, (-act[v], v))

    def _pick_branch(self) -> Optional[int]:
        heap, vals, act = self.heap, self.vals, self.activity
        while heap:
            a, v = heapq.heappop(heap)
            if vals[v << 1] == _UNDEF and -a == act[v]:
                return (v << 1) | self.phase[v]
        # stale entries exhausted; fall back to a scan
        for v in range(1, self.nvars + 1):
            if vals[v << 1] == _UNDEF:
                return (v << 1) | self.phase[v]
        return None

    # -- conflict analysis --------------------------------------------------
    def _analyze(self, confl):
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = None
        idx = len(trail) - 1
        while True:
            for q in (confl if p is None else confl[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    self._bump(v)
                    seen[v] = True
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # local minimization: drop literals implied by other learnt literals
        keep = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or not all(seen[x >> 1] or level[x >> 1] == 0 for x in r[1:]):
                keep.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = False
        learnt = keep

        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for i in range(2, len(learnt)):
            if level[learnt[i] >> 1] > level[learnt[best] >> 1]:
                best = i
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _analyze_final(self, failed: int) -> list[int]:
        """Assumptions (as codes) implying the negation of ``failed``."""
        core = [failed]
        v0 = failed >> 1
        if self.level[v0] == 0:
            return core
        seen, reason, level = self.seen, self.reason, self.level
        seen[v0] = True
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            c = self.trail[i]
            v = c >> 1
            if not seen[v]:
                continue
            r = reason[v]
            if r is None:
                core.append(c)
            else:
                for x in r[1:]:
                    if level[x >> 1] > 0:
                        seen[x >> 1] = True
            seen[v] = False
        seen[v0] = False
        return core

    def _reduce_db(self) -> None:
        locked = set()
        for c in self.trail:
            r = self.reason[c >> 1]
            if r is not None:
                locked.add(id(r))
        lbd = self._lbd
        cands = [c for c in self.learnts if len(c) > 2 and id(c) not in locked]
        cands.sort(key=lambda c: (lbd.get(id(c), 0), len(c)))
        drop = {id(c) for c in cands[len(cands) // 2:]}
        if not drop:
            return
        self.learnts = [c for c in self.learnts if id(c) not in drop]
        for k in drop:
            lbd.pop(k, None)
        self.watches = [[c for c in ws if id(c) not in drop] for ws in self.watches]

    # -- search -------------------------------------------------------------
    def solve(self, assumptions: Iterable[int] = ()):
        """Return :class:`Sat` with a total model or :class:`Unsat` with a core."""
        self.stats.solves += 1
        assumptions = [int(a) for a in assumptions]
        if assumptions:
            self.reserve(max(abs(a) for a in assumptions))
        if not self.ok:
            return Unsat([])
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return Unsat([])
        assume = [_code(a) for a in assumptions]
        restart = 0
        while True:
            budget = luby(2, restart) * self.restart_base
            result = self._search(assume, budget)
            if result is not None:
                self._cancel_until(0)
                return result
            restart += 1
            self.stats.restarts += 1

    def _search(self, assume, budget):
        conflicts = 0
        vals = self.vals
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                self.stats.conflicts += 1
                if not self.trail_lim:
                    self.ok = False
                    return Unsat([])
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self._lbd[id(learnt)] = len({self.level[x >> 1] for x in learnt})
                    self.watches[learnt[0] ^ 1].append(learnt)
                    self.watches[learnt[1] ^ 1].append(learnt)
                    self._enqueue(learnt[0], learnt)
                    self.stats.learnt_clauses += 1
                self.var_inc /= self.var_decay
                continue
            if conflicts >= budget:
                self._cancel_until(0)
                return None
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
                self.max_learnts *= 1.1
            nxt = None
            while len(self.trail_lim) < len(assume):
                a = assume[len(self.trail_lim)]
                if vals[a] == _TRUE:
                    self.trail_lim.append(len(self.trail))
                elif vals[a] == _FALSE:
                    core = self._analyze_final(a ^ 1)
                    # core holds the failed assumption's negation plus decisions
                    lits = {_lit(a)} | {_lit(c) for c in core[1:]}
                    ordered = [x for x in dict.fromkeys(_lit(c) for c in assume) if x in lits]
                    return Unsat(ordered)
                else:
                    nxt = a
                    break
            if nxt is None:
                nxt = self._pick_branch()
                if nxt is None:
                    model = [False] * (self.nvars + 1)
                    for v in range(1, self.nvars + 1):
                        model[v] = vals[v << 1] == _TRUE
                    return Sat(model)
                self.stats.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(nxt, None)


def check_model(clauses, model) -> bool:
    """True when ``model`` (indexed by variable) satisfies every clause."""
    for c in clauses:
        if not any((model[x] if x > 0 else not model[-x]) for x in c):
            return False
    return True
