"""Search for graphs that the order rules cannot refute but that have no valid order.

The search space is fork/join shapes: parallel branches, each a sequence of
groups of concurrently spawned single-access threads.  Every group holds
accesses of one kind to one variable.  A shape is turned both into an event
order graph and into an MTL program whose only counterexample has exactly
that read-from choice, so the program exercises the exact-validation path.
"""

from __future__ import annotations

import random
import time
from collections import Counter
from dataclasses import dataclass

from ..eog import EOGEvent, EventOrderGraph, RFEdge, closure
from .eogenum import eog_feasible_bruteforce


@dataclass
class ForkJoinShape:
    branches: list      # branch -> group -> [(var, kind), ...]
    rf: dict            # flat reader index -> flat writer index

    def flat(self):
        """(branch, group, var, kind) per event, in a fixed order."""
        out = []
        for b, groups in enumerate(self.branches):
            for gi, grp in enumerate(groups):
                for var, kind in grp:
                    out.append((b, gi, var, kind))
        return out

    def to_json(self) -> dict:
        return {"branches": [[[list(a) for a in grp] for grp in groups] for groups in self.branches],
                "rf": {str(r): w for r, w in sorted(self.rf.items())}}

    @classmethod
    def from_json(cls, doc) -> "ForkJoinShape":
        branches = [[[tuple(a) for a in grp] for grp in groups] for groups in doc["branches"]]
        return cls(branches, {int(r): w for r, w in doc["rf"].items()})


def _names(flat):
    cnt: Counter = Counter()
    names = []
    for _, _, var, _ in flat:
        cnt[var] += 1
        names.append(f"{var}{cnt[var]}")
    return names


def _po(flat):
    po = []
    for i, (bi, gi, _, _) in enumerate(flat):
        for j, (bj, gj, _, _) in enumerate(flat):
            if bi == bj and gj == gi + 1:
                po.append((i, j))
    return po


def shape_to_eog(shape: ForkJoinShape) -> EventOrderGraph:
    flat = shape.flat()
    names = _names(flat)
    events = [EOGEvent(names[i], var, kind, b + 1) for i, (b, _, var, kind) in enumerate(flat)]
    rf, lits = [], {}
    for k, (r, w) in enumerate(sorted(shape.rf.items()), start=1):
        name = f"s[{names[r]},{names[w]}]"
        rf.append(RFEdge(w, r, k, name))
        lits[k] = name
    return EventOrderGraph(events, _po(flat), rf, lits)


def random_fork_join_shape(rng: random.Random, variables: str = "xy") -> ForkJoinShape | None:
    branches = []
    for _ in range(rng.randint(2, 3)):
        groups = []
        for _ in range(rng.randint(1, 2)):
            var, kind = rng.choice(variables), rng.choice("RW")
            groups.append([(var, kind)] * rng.randint(1, 2))
        branches.append(groups)
    shape = ForkJoinShape(branches, {})
    flat = shape.flat()
    g0 = EventOrderGraph(shape_to_eog(shape).events, _po(flat), [])
    for r, (_, _, var, kind) in enumerate(flat):
        if kind != "R":
            continue
        writers = [w for w in g0.writes_of(var) if not g0.po_succ[r] >> w & 1]
        unordered = [w for w in writers if not g0.po_succ[w] >> r & 1]
        if unordered and rng.random() < 0.8:
            writers = unordered
        if not writers:
            return None
        shape.rf[r] = rng.choice(writers)
    return shape


def shape_to_program(shape: ForkJoinShape) -> str:
    """An MTL program whose abstraction admits exactly the shape's read-from choice.

    Writes store distinct values; each read assumes the value of its writer.
    The final assertion fails in every complete run, so the program is safe
    exactly when no run exists.
    """
    flat = shape.flat()
    names = _names(flat)
    value = {i: int(names[i][1:]) for i, (_, _, _, k) in enumerate(flat) if k == "W"}
    variables = sorted({v for _, _, v, _ in flat})
    lines = ["// Fork/join shape whose read-from requirements admit no total order."]
    lines += [f"shared int {v} = 0;" for v in variables]
    lines.append("")
    for i, (_, _, var, kind) in enumerate(flat):
        if kind == "W":
            lines.append(f"thread e{i} {{ {var} = {value[i]}; }}")
        else:
            lines.append(f"thread e{i} {{")
            lines.append(f"  local int t = {var};")
            lines.append(f"  assume(t == {value[shape.rf[i]]});")
            lines.append("}")
    idx = 0
    for b, groups in enumerate(shape.branches):
        lines.append("")
        lines.append(f"thread branch{b} {{")
        for grp in groups:
            handles = []
            for _ in grp:
                handles.append(f"h{idx}")
                lines.append(f"  h{idx} = spawn e{idx};")
                idx += 1
            lines += [f"  join {h};" for h in handles]
        lines.append("}")
    lines.append("")
    lines.append("main {")
    lines += [f"  b{b} = spawn branch{b};" for b in range(len(shape.branches))]
    lines += [f"  join b{b};" for b in range(len(shape.branches))]
    lines.append("  assert(0 == 1);")
    lines.append("}")
    return "\n".join(lines) + "\n"


def search_butterfly(seed: int = 1, time_budget: float = 60.0, variables: str = "xy"):
    """First shape that closure leaves undecided but that has no valid order.

    Returns ``(shape, graph, tried)`` or ``None`` when the budget runs out.
    """
    rng = random.Random(seed)
    deadline = time.perf_counter() + time_budget
    tried = 0
    while time.perf_counter() < deadline:
        shape = random_fork_join_shape(rng, variables)
        if shape is None:
            continue
        tried += 1
        g = shape_to_eog(shape)
        if closure(g).infeasible:
            continue
        if not eog_feasible_bruteforce(g):
            return shape, g, tried
    return None
