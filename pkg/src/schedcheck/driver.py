"""Verification engines: the refinement loop, a one-shot encoding and explicit search."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .encoder.encode import EncodedProgram, bv_value, encode, encode_scheduling, lit_value
from .eog import EventOrderGraph, ContractViolation, build_eog, closure, refine, DEFAULT_REASON_CAP
from .exactorder import refine_from_core, validate_exact
from .frontend import load
from .frontend.normalize import NormalizedProgram
from .oracle.interp import (DEFAULT_NONDET, DEFAULT_STEP_BOUND, Machine, Schedule, Step,
                            enumerate_schedules, nondet_sites, replay)
from .sat import Solver

STATS_SCHEMA_VERSION = 1
ENGINES = ("cegar", "monolithic", "explicit")

SAFE, UNSAFE, UNKNOWN = "SAFE", "UNSAFE", "UNKNOWN"


@dataclass
class Config:
    engine: str = "cegar"
    unwind: int = 2
    width: int = 8
    max_iter: int = 10_000
    seed: int = 0
    prune_links: bool = True
    check_invariants: bool = False
    reason_cap: int = DEFAULT_REASON_CAP
    time_limit: Optional[float] = None      # seconds, cegar only
    nondet_values: tuple = DEFAULT_NONDET   # explicit engine only
    step_bound: int = DEFAULT_STEP_BOUND    # explicit engine only
    unwinding_assertions: bool = False

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.unwind < 1 or self.width < 2 or self.max_iter < 0:
            raise ValueError("unwind >= 1, width >= 2 and max_iter >= 0 are required")


@dataclass
class Stats:
    engine: str
    iterations: int = 0
    clauses_initial: int = 0
    clauses_refinement: int = 0
    clauses_monolithic: Optional[int] = None
    time_ms: dict = field(default_factory=lambda: dict.fromkeys(("encode", "solve", "closure", "exact"), 0.0))
    graph_invocations: int = 0
    fallback_invocations: int = 0
    solver_calls: int = 0
    explored_states: Optional[int] = None
    kappas: list = field(default_factory=list)   # (source, clauses) per refinement

    def to_json(self, verdict: str) -> dict:
        return {
            "schema_version": STATS_SCHEMA_VERSION,
            "engine": self.engine,
            "verdict": verdict,
            "iterations": self.iterations,
            "clauses_initial": self.clauses_initial,
            "clauses_refinement": self.clauses_refinement,
            "clauses_monolithic": self.clauses_monolithic,
            "time_ms": {k: round(v, 3) for k, v in self.time_ms.items()},
            "graph_invocations": self.graph_invocations,
            "fallback_invocations": self.fallback_invocations,
            "solver_calls": self.solver_calls,
            "explored_states": self.explored_states,
        }


@dataclass
class Verdict:
    kind: str
    stats: Stats
    witness: Optional[Schedule] = None
    reason: Optional[str] = None

    @property
    def safe(self) -> bool:
        return self.kind == SAFE

    @property
    def unsafe(self) -> bool:
        return self.kind == UNSAFE

    def __str__(self) -> str:
        return self.kind


class _Timer:
    def __init__(self, stats: Stats, phase: str):
        self.stats, self.phase = stats, phase

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.stats.time_ms[self.phase] += (time.perf_counter() - self.t0) * 1000.0


# -- witnesses -----------------------------------------------------------------------

def model_nondet(ep: EncodedProgram, model) -> dict:
    return {uid: bv_value(model, bits) for uid, bits in ep.nondet_bits.items()}


def build_witness(ep: EncodedProgram, g: EventOrderGraph, order, model, *,
                  check_values: bool = True) -> Schedule:
    """Interleave a whole run around a feasible total order of the graph's events.

    Global statements follow ``order`` (indices into ``g.events``); each thread's
    local statements run as soon as they are reachable, i.e. right after the
    later of their thread predecessor and the preceding global statement.
    Guard-disabled statements are elided.
    """
    p = ep.program
    m = Machine(p, ep.width)
    nd = model_nondet(ep, model)
    pcs, vals, violated = m.initial()
    steps = []
    queue = [g.events[i].source for i in order]
    k = 0
    while True:
        progressed = False
        for t in range(len(pcs)):
            c = m.classify(pcs, vals, t)
            if c is not None and not c[1]:
                s, _, on = c
                nxt = m.execute(pcs, vals, violated, t, s, on, nd)
                if nxt is None:
                    raise ContractViolation(f"witness: assume fails at {s.text()}")
                if on:
                    steps.append(Step(t, s.index, s.text(), nxt[3]))
                pcs, vals, violated = nxt[:3]
                progressed = True
                break
        if progressed:
            continue
        if k == len(queue):
            break
        s = p.events[queue[k]]
        c = m.classify(pcs, vals, s.thread)
        if c is None or c[0] is not s or not c[1]:
            raise ContractViolation(f"witness: event {queue[k]} ({s.text()}) is not executable next")
        nxt = m.execute(pcs, vals, violated, s.thread, s, True, nd)
        if check_values:
            ev = ep.events[s.event]
            want = bv_value(model, ev.value)
            got = nxt[1][m.slot[s.target if s.kind == "read" else s.var]]
            if want != got:
                raise ContractViolation(f"witness: {ev.name} = {got} but the model says {want}")
        steps.append(Step(s.thread, s.index, s.text(), nxt[3]))
        pcs, vals, violated = nxt[:3]
        k += 1
    if not all(m.done(pcs, t) for t in range(len(pcs))):
        raise ContractViolation("witness: some thread did not finish")
    used = {u for st in steps for u in _sites(m, st)}
    return Schedule(dict(p.shared), steps, {u: nd.get(u, 0) for u in sorted(used)}, m.labels)


def _sites(m: Machine, st: Step):
    s = m.stmts[st.thread][st.index]
    return nondet_sites(s.expr) if s.expr is not None else []


def _check_witness(ep: EncodedProgram, w: Schedule) -> None:
    r = replay(ep.program, w, width=ep.width)
    if not r.ok:
        raise ContractViolation("witness does not replay to an assertion violation")


# -- engines -----------------------------------------------------------------------------

def verify(program: NormalizedProgram, config: Config | None = None) -> Verdict:
    """Check all assertions of ``program`` under every interleaving."""
    config = config or Config()
    if config.engine == "cegar":
        return _cegar(program, config)
    if config.engine == "monolithic":
        return _monolithic(program, config)
    return _explicit(program, config)


def verify_source(source: str, config: Config | None = None) -> Verdict:
    config = config or Config()
    p = load(source, config.unwind, unwinding_assertions=config.unwinding_assertions)
    return verify(p, config)


def _cegar(p: NormalizedProgram, config: Config) -> Verdict:
    stats = Stats("cegar")
    with _Timer(stats, "encode"):
        ep = encode(p, width=config.width, prune_links=config.prune_links)
        cnf = ep.cnf
        solver = Solver(seed=config.seed)
        solver.reserve(cnf.nvars)
        base = cnf.clauses("init", "rho", "zeta", "err")
        solver.add_clauses(base)
    stats.clauses_initial = len(base)
    allowed = {abs(x) for x in ep.literal_names()}
    deadline = None if config.time_limit is None else time.perf_counter() + config.time_limit
    while True:
        if stats.iterations >= config.max_iter:
            return Verdict(UNKNOWN, stats, reason="iteration budget exhausted")
        if deadline is not None and time.perf_counter() > deadline:
            return Verdict(UNKNOWN, stats, reason="time budget exhausted")
        with _Timer(stats, "solve"):
            res = solver.solve()
        stats.solver_calls += 1
        if not res:
            return Verdict(SAFE, stats)
        model = res.model
        with _Timer(stats, "closure"):
            g = build_eog(ep, model)
            out = closure(g, reason_cap=config.reason_cap)
            stats.graph_invocations += 1
        if out.infeasible:
            kappa, source = refine(out), "graph"
        else:
            stats.fallback_invocations += 1
            with _Timer(stats, "exact"):
                ex = validate_exact(g, seed=config.seed)
            if ex:
                w = build_witness(ep, g, ex.order, model)
                _check_witness(ep, w)
                return Verdict(UNSAFE, stats, witness=w)
            kappa, source = refine_from_core(ex.core), "exact"
        if config.check_invariants:
            for clause in kappa:
                if any(lit_value(model, x) for x in clause):
                    raise ContractViolation(f"no progress: model satisfies {clause}")
                if any(abs(x) not in allowed for x in clause):
                    raise ContractViolation(f"refinement over unknown literal: {clause}")
        solver.add_clauses(kappa)
        stats.kappas.append((source, kappa))
        stats.clauses_refinement += len(kappa)
        stats.iterations += 1


def _order_from_clocks(ep: EncodedProgram, g: EventOrderGraph, model) -> list[int]:
    clk = {i: bv_value(model, ep.clocks[e.source], signed=False) for i, e in enumerate(g.events)}
    return sorted(clk, key=lambda i: (clk[i], i))


def _monolithic(p: NormalizedProgram, config: Config) -> Verdict:
    stats = Stats("monolithic")
    with _Timer(stats, "encode"):
        ep = encode(p, width=config.width, prune_links=config.prune_links)
        encode_scheduling(ep)
        clauses = ep.cnf.clauses()
        solver = Solver(seed=config.seed)
        solver.reserve(ep.cnf.nvars)
        solver.add_clauses(clauses)
    stats.clauses_initial = stats.clauses_monolithic = len(clauses)
    with _Timer(stats, "solve"):
        res = solver.solve()
    stats.solver_calls = 1
    if not res:
        return Verdict(SAFE, stats)
    g = build_eog(ep, res.model)
    w = build_witness(ep, g, _order_from_clocks(ep, g, res.model), res.model)
    _check_witness(ep, w)
    return Verdict(UNSAFE, stats, witness=w)


def _explicit(p: NormalizedProgram, config: Config) -> Verdict:
    stats = Stats("explicit")
    with _Timer(stats, "solve"):
        r = enumerate_schedules(p, config.step_bound, nondet_values=config.nondet_values,
                                width=config.width)
    stats.explored_states = r.states
    if r:
        return Verdict(SAFE, stats)
    return Verdict(UNSAFE, stats, witness=r.schedule)
