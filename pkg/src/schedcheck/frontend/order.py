from __future__ import annotations

from .normalize import JOIN, SPAWN, NormalizedProgram


class ProgramOrder:
    """Program order over event ids, stored as closed successor bitsets."""

    def __init__(self, succ: list[int]):
        self.succ = succ
        self.n = len(succ)

    def __contains__(self, pair) -> bool:
        a, b = pair
        return bool(self.succ[a] >> b & 1)

    def pairs(self):
        for a, bits in enumerate(self.succ):
            b = 0
            while bits:
                if bits & 1:
                    yield a, b
                bits >>= 1
                b += 1

    def __len__(self) -> int:
        return sum(bin(b).count("1") for b in self.succ)

    def restrict(self, events) -> list[tuple[int, int]]:
        """All ordered pairs whose endpoints lie in ``events``."""
        mask = 0
        for e in events:
            mask |= 1 << e
        return [(a, b) for a in events for b in _bits(self.succ[a] & mask)]

    def reduction(self, events=None) -> list[tuple[int, int]]:
        """Hasse edges of the order, optionally restricted to ``events``."""
        if events is None:
            events = range(self.n)
        mask = 0
        for e in events:
            mask |= 1 << e
        out = []
        for a in events:
            later = self.succ[a] & mask
            implied = 0
            for b in _bits(later):
                implied |= self.succ[b]
            out.extend((a, b) for b in _bits(later & ~implied))
        return out

    def is_acyclic(self) -> bool:
        return all(not (self.succ[a] >> a & 1) for a in range(self.n))


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def program_order(p: NormalizedProgram) -> ProgramOrder:
    """Close the same-thread, spawn and join orderings over all events."""
    # nodes: every statement plus a start/end node per thread instance
    node_of = {}
    succ: list[list[int]] = []

    def new_node():
        succ.append([])
        return len(succ) - 1

    start, end = {}, {}
    for t in p.threads:
        start[t.tid] = new_node()
        for s in t.stmts:
            node_of[(t.tid, s.index)] = new_node()
        end[t.tid] = new_node()
    for t in p.threads:
        chain = [start[t.tid]] + [node_of[(t.tid, s.index)] for s in t.stmts] + [end[t.tid]]
        for a, b in zip(chain, chain[1:]):
            succ[a].append(b)
        for s in t.stmts:
            if s.kind in (SPAWN, JOIN):
                if s.child is None or s.child >= len(p.threads):
                    raise ValueError(f"{s.kind} of a thread that was never spawned")
                if s.kind == SPAWN:
                    succ[node_of[(t.tid, s.index)]].append(start[s.child])
                else:
                    succ[end[s.child]].append(node_of[(t.tid, s.index)])

    event_bit = [0] * len(succ)
    for s in p.events:
        event_bit[node_of[(s.thread, s.index)]] = 1 << s.event

    # reverse topological sweep; iterative DFS keeps deep programs off the C stack
    order, state = [], [0] * len(succ)
    for root in range(len(succ)):
        if state[root]:
            continue
        stack = [(root, 0)]
        state[root] = 1
        while stack:
            node, i = stack[-1]
            if i < len(succ[node]):
                stack[-1] = (node, i + 1)
                nxt = succ[node][i]
                if state[nxt] == 1:
                    raise ValueError("program order contains a cycle")
                if state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, 0))
            else:
                state[node] = 2
                order.append(node)
                stack.pop()
    below = [0] * len(succ)   # events strictly after each node
    for node in order:
        acc = 0
        for nxt in succ[node]:
            acc |= below[nxt] | event_bit[nxt]
        below[node] = acc
    return ProgramOrder([below[node_of[(s.thread, s.index)]] for s in p.events])
