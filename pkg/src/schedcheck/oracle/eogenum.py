"""Brute-force feasibility of event order graphs by total-order enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from ..eog import EventOrderGraph

DEFAULT_CAP = 20


class GraphTooLarge(Exception):
    pass


@dataclass
class Feasible:
    order: list

    def __bool__(self):
        return True


@dataclass
class Infeasible:
    def __bool__(self):
        return False


def eog_feasible_bruteforce(g: EventOrderGraph, *, cap: int = DEFAULT_CAP):
    """Search for a total order obeying program order and read-from requirements.

    The order is built left to right.  Placing a write ``w'`` is illegal while
    some read-from edge ``w ◁ r`` on the same variable is open (``w`` placed,
    ``r`` not yet), and a read may only be placed after its writer.  Results
    are memoized on the set of placed events, which decides everything about
    the remaining suffix.
    """
    n = len(g.events)
    if n > cap:
        raise GraphTooLarge(f"{n} events exceed the enumeration cap of {cap}")
    pred = [0] * n
    for a, b in g.po:
        pred[b] |= 1 << a
    for e in g.rf:
        pred[e.reader] |= 1 << e.writer
    rfs = [(e.writer, e.reader, g.events[e.writer].var) for e in g.rf]
    is_write = [e.kind == "W" for e in g.events]
    var = [e.var for e in g.events]
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def search(placed: int):
        if placed == full:
            return ()
        for e in range(n):
            bit = 1 << e
            if placed & bit or pred[e] & ~placed:
                continue
            if is_write[e] and any(placed >> w & 1 and not placed >> r & 1 and v == var[e]
                                   for w, r, v in rfs):
                continue
            rest = search(placed | bit)
            if rest is not None:
                return (e,) + rest
        return None

    order = search(0)
    search.cache_clear()
    return Infeasible() if order is None else Feasible(list(order))
