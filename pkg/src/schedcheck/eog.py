"""Event order graphs: rule-based order closure, kernel reasons and refinement.

An event order graph (EOG) holds the events of one counterexample, the
program-order pairs among them and the read-from edges chosen by the model.
:func:`closure` saturates the "happens before" relation under three rules

1. transitivity,
2. ``w ◁ r``, ``w' ≺ r``, ``w'`` writes the same variable  ⟹  ``w' ≺ w``,
3. ``w ◁ r``, ``w ≺ w'``, ``w'`` writes the same variable  ⟹  ``r ≺ w'``,

while tracking, for every order, the minimal literal sets (kernel reasons)
that are enough to derive it.  A self-loop ``e ≺ e`` proves the graph
infeasible and its kernel reasons become blocking clauses.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

DEFAULT_REASON_CAP = 32

INFEASIBLE = "infeasible"
NOT_SURE = "not-sure"


class ContractViolation(Exception):
    """Internal invariant broken (encoder bug or misuse of the API)."""


@dataclass
class EOGEvent:
    name: str
    var: str
    kind: str                    # "R" | "W"
    thread: int = 0
    guard: Optional[int] = None  # None: constant true
    source: Optional[int] = None  # event id in the encoded program


@dataclass
class RFEdge:
    writer: int
    reader: int
    sel: int
    name: str = ""


class EventOrderGraph:
    """Events, program-order pairs (kept transitively closed) and read-from edges."""

    def __init__(self, events, po, rf, lit_names: dict | None = None):
        self.events: list[EOGEvent] = list(events)
        self.rf: list[RFEdge] = list(rf)
        self.lit_names: dict[int, str] = dict(lit_names or {})
        n = len(self.events)
        succ = [0] * n
        for a, b in po:
            succ[a] |= 1 << b
        # transitive closure (Floyd-Warshall over bitsets)
        for k in range(n):
            bit = 1 << k
            for i in range(n):
                if succ[i] & bit:
                    succ[i] |= succ[k]
        self.po_succ = succ
        for e in self.rf:
            we, re_ = self.events[e.writer], self.events[e.reader]
            if we.kind != "W" or re_.kind != "R" or we.var != re_.var:
                raise ContractViolation(f"bad read-from edge {we.name} -> {re_.name}")

    def __len__(self) -> int:
        return len(self.events)

    @property
    def po(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(len(self.events)) for b in _bits(self.po_succ[a])]

    def po_reduction(self) -> list[tuple[int, int]]:
        """Hasse edges; a cyclic relation has none, so all pairs are returned."""
        if any(s >> a & 1 for a, s in enumerate(self.po_succ)):
            return self.po
        out = []
        for a, later in enumerate(self.po_succ):
            implied = 0
            for b in _bits(later):
                implied |= self.po_succ[b]
            out.extend((a, b) for b in _bits(later & ~implied))
        return out

    def writes_of(self, var: str) -> list[int]:
        return [i for i, e in enumerate(self.events) if e.kind == "W" and e.var == var]

    def index(self, name: str) -> int:
        for i, e in enumerate(self.events):
            if e.name == name:
                return i
        raise KeyError(name)

    def name_of(self, lit: int) -> str:
        if lit in self.lit_names:
            return self.lit_names[lit]
        if -lit in self.lit_names:
            return "!" + self.lit_names[-lit]
        return f"l{lit}"

    def literals(self) -> list[int]:
        """The true guard and link literals that shape this graph."""
        lits = {e.guard for e in self.events if e.guard is not None}
        lits.update(e.sel for e in self.rf)
        return sorted(lits, key=abs)

    # -- JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        def lit(x):
            return None if x is None else self.name_of(x)
        return {
            "events": [{"name": e.name, "var": e.var, "type": e.kind, "thread": e.thread,
                        "guard": lit(e.guard)} for e in self.events],
            "po": [list(p) for p in self.po_reduction()],
            "rf": [{"writer": e.writer, "reader": e.reader, "literal": lit(e.sel)}
                   for e in self.rf],
            "literals": {self.name_of(x): x for x in self.literals()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, doc) -> "EventOrderGraph":
        """Build a graph from :meth:`to_json` output.

        Events may be referenced by index or name; literal names missing from
        the ``literals`` table get fresh positive ids.
        """
        if isinstance(doc, str):
            doc = json.loads(doc)
        lit_ids = dict(doc.get("literals", {}))
        next_id = max([abs(v) for v in lit_ids.values()], default=0) + 1

        def lit(name):
            nonlocal next_id
            if name is None:
                return None
            if name not in lit_ids:
                lit_ids[name] = next_id
                next_id += 1
            return lit_ids[name]

        events = [EOGEvent(e["name"], e["var"], e["type"], e.get("thread", 0), lit(e.get("guard")))
                  for e in doc["events"]]
        names = {e.name: i for i, e in enumerate(events)}

        def ref(x):
            return names[x] if isinstance(x, str) else int(x)

        po = [(ref(a), ref(b)) for a, b in doc.get("po", [])]
        rf = []
        for e in doc.get("rf", []):
            name = e.get("literal") or f"s[{e['writer']},{e['reader']}]"
            rf.append(RFEdge(ref(e["writer"]), ref(e["reader"]), lit(name), name))
        return cls(events, po, rf, {v: k for k, v in lit_ids.items()})

    @classmethod
    def loads(cls, text: str) -> "EventOrderGraph":
        return cls.from_json(json.loads(text))


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


# -- building from a model ---------------------------------------------------------

def build_eog(ep, model) -> EventOrderGraph:
    """Event order graph of an abstraction model (guards and link literals)."""
    from .encoder.encode import lit_value

    T = ep.cnf.true
    active = [e for e in ep.events if lit_value(model, e.guard)]
    local = {e.id: i for i, e in enumerate(active)}
    events = [EOGEvent(e.name, e.var, e.kind, e.thread, None if e.guard == T else e.guard, e.id)
              for e in active]
    po = ep.order.restrict([e.id for e in active])
    rf = []
    for lk in ep.links:
        if not lit_value(model, lk.sel):
            continue
        if lk.writer not in local or lk.reader not in local:
            raise ContractViolation(f"link {lk.name} selected with an inactive endpoint")
        rf.append(RFEdge(local[lk.writer], local[lk.reader], lk.sel, lk.name))
    g = EventOrderGraph(events, [(local[a], local[b]) for a, b in po], rf, ep.literal_names())
    readers = [0] * len(events)
    for e in rf:
        readers[e.reader] += 1
    for i, ev in enumerate(events):
        if ev.kind == "R" and readers[i] != 1:
            raise ContractViolation(f"read {ev.name} has {readers[i]} read-from edges")
    return g


# -- closure with kernel reasons --------------------------------------------------------

@dataclass
class ClosureOutcome:
    verdict: str
    conflicts: list                  # events e with e ≺ e
    before: list                     # bitset per event
    after: list
    reasons: dict                    # (a, b) -> list[frozenset[int]]
    graph: EventOrderGraph = field(repr=False, default=None)

    @property
    def infeasible(self) -> bool:
        return self.verdict == INFEASIBLE

    def orders(self) -> set[tuple[int, int]]:
        return set(self.reasons)

    def has(self, a, b) -> bool:
        return bool(self.after[a] >> b & 1)

    def named_orders(self) -> set[tuple[str, str]]:
        ev = self.graph.events
        return {(ev[a].name, ev[b].name) for a, b in self.reasons}

    def reasons_named(self, a, b) -> list[set[str]]:
        g = self.graph
        return [{g.name_of(x) for x in r} for r in self.reasons.get((a, b), [])]


def _reason_key(r: frozenset):
    return (len(r), tuple(sorted(r, key=lambda x: (abs(x), x))))


class _Closure:
    def __init__(self, g: EventOrderGraph, cap: int, lifo: bool):
        self.g = g
        self.cap = cap
        self.lifo = lifo
        n = len(g.events)
        self.before = [0] * n
        self.after = [0] * n
        self.reasons: dict[tuple[int, int], list[frozenset]] = {}
        self.seen: dict[tuple[int, int], set] = {}
        self.queue: deque = deque()
        self.queued: set = set()
        self.is_write = [e.kind == "W" for e in g.events]
        self.var = [e.var for e in g.events]
        self.write_mask: dict[str, int] = {}
        for i, e in enumerate(g.events):
            if e.kind == "W":
                self.write_mask[e.var] = self.write_mask.get(e.var, 0) | 1 << i
        self.rf_src: dict[int, tuple[int, frozenset]] = {}
        self.readers: dict[int, list[tuple[int, frozenset]]] = {}

    def offer(self, pair, new) -> None:
        cur = self.reasons.get(pair)
        fresh = cur is None
        if fresh:
            cur = []
            a, b = pair
            self.after[a] |= 1 << b
            self.before[b] |= 1 << a
        seen = self.seen.setdefault(pair, set())
        changed = fresh
        for r in new:
            if r in seen:
                continue
            seen.add(r)
            if any(o <= r for o in cur):
                continue
            cur = [o for o in cur if not r <= o]
            cur.append(r)
            changed = True
        if len(cur) > self.cap:
            cur.sort(key=_reason_key)
            del cur[self.cap:]
        self.reasons[pair] = cur
        if changed and pair not in self.queued:
            self.queued.add(pair)
            self.queue.append(pair)

    @staticmethod
    def prod(xs, ys):
        return {x | y for x, y in product(xs, ys)}

    def process(self, pair) -> None:
        a, b = pair
        O = self.reasons[pair]
        R = self.reasons
        prod = self.prod
        # Rule 1, (a,b) first then second premise
        for c in _bits(self.after[b]):
            self.offer((a, c), prod(O, R[(b, c)]))
        for c in _bits(self.before[a]):
            self.offer((c, b), prod(R[(c, a)], O))
        # Rule 2 with (a,b) as the write-before-read premise
        src = self.rf_src.get(b)
        if src is not None and self.is_write[a] and self.var[a] == self.var[b] and a != src[0]:
            self.offer((a, src[0]), prod([src[1]], O))
        # Rule 3 with (a,b) as the write-before-write premise
        if self.is_write[a] and self.is_write[b] and a != b and self.var[a] == self.var[b]:
            for r, sel in self.readers.get(a, ()):
                self.offer((r, b), prod([sel], O))

    def activate(self, e: RFEdge) -> None:
        w, r = e.writer, e.reader
        sel = frozenset([e.sel])
        self.rf_src[r] = (w, sel)
        self.readers.setdefault(w, []).append((r, sel))
        self.offer((w, r), [sel])
        wm = self.write_mask.get(self.var[w], 0)
        for e3 in _bits(self.before[r] & wm):
            if e3 != w:
                self.offer((e3, w), self.prod([sel], self.reasons[(e3, r)]))
        for e3 in _bits(self.after[w] & wm):
            if e3 != w:
                self.offer((r, e3), self.prod([sel], self.reasons[(w, e3)]))

    def drain(self) -> None:
        q = self.queue
        while q:
            pair = q.pop() if self.lifo else q.popleft()
            self.queued.discard(pair)
            self.process(pair)

    def run(self) -> ClosureOutcome:
        g = self.g
        for a, b in g.po:
            ga, gb = g.events[a].guard, g.events[b].guard
            self.offer((a, b), [frozenset(x for x in (ga, gb) if x is not None)])
        # program order is already transitively closed; nothing to propagate yet
        self.queue.clear()
        self.queued.clear()
        for e in g.rf:
            self.activate(e)
            self.drain()
        conflicts = [i for i in range(len(g.events)) if self.after[i] >> i & 1]
        return ClosureOutcome(INFEASIBLE if conflicts else NOT_SURE, conflicts,
                              self.before, self.after, self.reasons, g)


def closure(g: EventOrderGraph, *, reason_cap: int = DEFAULT_REASON_CAP,
            lifo: bool = False) -> ClosureOutcome:
    """Saturate the order relation of ``g`` and collect kernel reasons.

    ``lifo`` switches the worklist to stack order; the resulting order set is
    the same either way.
    """
    return _Closure(g, reason_cap, lifo).run()


def antichain(reasons) -> list[frozenset]:
    """Minimal elements under set inclusion, in a canonical order."""
    out: list[frozenset] = []
    for r in sorted(set(reasons), key=_reason_key):
        if not any(o <= r for o in out):
            out.append(r)
    return out


def infeasibility_reasons(outcome: ClosureOutcome) -> list[frozenset]:
    """Kernel reasons of all self-loop orders, redundancy removed."""
    return antichain(r for e in outcome.conflicts for r in outcome.reasons[(e, e)])


def refine(outcome: ClosureOutcome) -> list[list[int]]:
    """One blocking clause per core kernel reason of an infeasible graph."""
    if not outcome.infeasible:
        raise ContractViolation("refine() called on a graph that was not proven infeasible")
    clauses = []
    for r in infeasibility_reasons(outcome):
        if not r:
            raise ContractViolation("empty kernel reason: program order alone is cyclic")
        clauses.append(sorted((-x for x in r), key=lambda x: (abs(x), x)))
    return clauses


def sub_eog(g: EventOrderGraph, reason) -> EventOrderGraph:
    """The part of ``g`` that is present whenever the literals of ``reason`` hold."""
    reason = set(reason)
    rf = [e for e in g.rf if e.sel in reason]
    keep = {i for i, e in enumerate(g.events) if e.guard is None or e.guard in reason}
    for e in rf:
        keep.update((e.writer, e.reader))
    keep = sorted(keep)
    idx = {old: new for new, old in enumerate(keep)}
    events = [g.events[i] for i in keep]
    po = [(idx[a], idx[b]) for a, b in g.po if a in idx and b in idx]
    rf2 = [RFEdge(idx[e.writer], idx[e.reader], e.sel, e.name) for e in rf]
    return EventOrderGraph(events, po, rf2, g.lit_names)


# -- random graphs for fuzzing ------------------------------------------------------------

def random_eog(rng, *, max_events: int = 10, n_vars: int = 2, max_threads: int = 3,
               init_writes: bool = True, guard_prob: float = 0.3,
               extra_po_prob: float = 0.0) -> EventOrderGraph:
    """A random program-shaped graph.

    Optional init writes precede everything; each thread is a chain; every
    read gets exactly one writer of its variable, chosen uniformly (it may be
    ordered after the read, which makes the graph infeasible).
    """
    names = "xyzuvw"[:n_vars]
    events: list[EOGEvent] = []
    po: list[tuple[int, int]] = []
    counters: dict[str, int] = {}
    lit = 0

    def new_event(v, kind, thread, guard):
        counters[v] = counters.get(v, 0) + 1
        events.append(EOGEvent(f"{v}{counters[v]}", v, kind, thread, guard))
        return len(events) - 1

    inits = []
    if init_writes:
        inits = [new_event(v, "W", 0, None) for v in names]
        for a, b in zip(inits, inits[1:]):
            po.append((a, b))
    budget = max(1, rng.randint(len(inits) + 1, max_events) - len(inits))
    threads = rng.randint(1, max_threads)
    sizes = [0] * threads
    for _ in range(budget):
        sizes[rng.randrange(threads)] += 1
    for t, size in enumerate(sizes, start=1):
        prev = inits[-1] if inits else None
        guard = None
        for _ in range(size):
            if rng.random() < guard_prob:
                lit += 1
                guard = lit
            e = new_event(rng.choice(names), rng.choice("RW"), t, guard)
            if prev is not None:
                po.append((prev, e))
            prev = e
    for a in range(len(events)):
        for b in range(len(events)):
            if a != b and rng.random() < extra_po_prob:
                po.append((a, b))
    rf = []
    lit_names = {x: f"g{x}" for x in range(1, lit + 1)}
    for r, ev in enumerate(events):
        if ev.kind != "R":
            continue
        writers = [w for w, e in enumerate(events) if e.kind == "W" and e.var == ev.var]
        if not writers:
            events[r] = EOGEvent(ev.name, ev.var, "W", ev.thread, ev.guard)
            continue
        w = rng.choice(writers)
        lit += 1
        name = f"s[{ev.name},{events[w].name}]"
        lit_names[lit] = name
        rf.append(RFEdge(w, r, lit, name))
    return EventOrderGraph(events, po, rf, lit_names)
