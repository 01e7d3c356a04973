"""Command-line interface.

Exit codes: 0 SAFE, 1 UNSAFE, 2 UNKNOWN, 3 input or usage error,
4 internal contract violation.  ``corpus`` exits 1 on any verdict mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from .driver import ENGINES, SAFE, UNKNOWN, UNSAFE, Config, Verdict, verify
from .encoder.encode import EncodingError, encode, encode_scheduling
from .eog import ContractViolation, EventOrderGraph, closure, infeasibility_reasons, refine
from .exactorder import validate_exact
from .frontend import FrontendError, load
from .oracle.interp import StepBoundExceeded

EXIT_CODES = {SAFE: 0, UNSAFE: 1, UNKNOWN: 2}
EXIT_ERROR = 3
EXIT_INTERNAL = 4
BUNDLED_CORPUS = Path(__file__).parent / "corpus"


class SidecarError(Exception):
    pass


def _config(args) -> Config:
    return Config(engine=args.engine, unwind=args.unwind, width=args.int_width,
                  max_iter=args.max_iter, seed=args.seed, prune_links=not args.no_link_pruning,
                  check_invariants=args.check_invariants)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--engine", choices=ENGINES, default="cegar")
    p.add_argument("--unwind", type=int, default=2, metavar="N", help="loop unwinding depth")
    p.add_argument("--int-width", type=int, default=8, metavar="N", help="integer bit width")
    p.add_argument("--max-iter", type=int, default=10_000, metavar="N",
                   help="refinement budget before answering UNKNOWN")
    p.add_argument("--seed", type=int, default=0, metavar="N", help="SAT solver seed")
    p.add_argument("--no-link-pruning", action="store_true",
                   help="keep read-from candidates that program order rules out")
    p.add_argument("--check-invariants", action="store_true",
                   help="assert refinement progress in every iteration")


def run_file(path, config: Config) -> Verdict:
    source = Path(path).read_text(encoding="utf-8")
    p = load(source, config.unwind, unwinding_assertions=config.unwinding_assertions)
    return verify(p, config)


def cmd_verify(args) -> int:
    try:
        config = _config(args)
        t0 = time.perf_counter()
        v = run_file(args.file, config)
    except StepBoundExceeded as e:
        print(UNKNOWN)
        print(f"note: {e}", file=sys.stderr)
        return EXIT_CODES[UNKNOWN]
    except ContractViolation as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except FrontendError as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, EncodingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    print(v.kind)
    if v.reason:
        print(f"note: {v.reason}", file=sys.stderr)
    if args.stats:
        doc = v.stats.to_json(v.kind)
        doc["wall_ms"] = round((time.perf_counter() - t0) * 1000.0, 3)
        Path(args.stats).write_text(json.dumps(doc, indent=2) + "\n")
    if args.witness and v.witness is not None:
        Path(args.witness).write_text(json.dumps(v.witness.to_json(), indent=2) + "\n")
    return EXIT_CODES[v.kind]


# -- corpus ---------------------------------------------------------------------------

def read_sidecar(mtl: Path) -> str:
    side = mtl.with_suffix(".expected")
    if not side.exists():
        raise SidecarError(f"{mtl.name}: missing {side.name}")
    text = side.read_text().strip()
    if text not in (SAFE, UNSAFE):
        raise SidecarError(f"{side.name}: expected SAFE or UNSAFE, found {text!r}")
    return text


def _corpus_entry(item) -> dict:
    path, expected, config = item
    row = {"file": Path(path).name, "expected": expected}
    t0 = time.perf_counter()
    try:
        v = run_file(path, config)
        row["verdict"] = v.kind
        s = v.stats
        row["iterations"] = s.iterations
        row["fallback_invocations"] = s.fallback_invocations
        row["clauses_initial"] = s.clauses_initial
    except StepBoundExceeded:
        row["verdict"] = UNKNOWN
    except Exception as e:  # reported per file, never aborts the whole run
        row["verdict"] = "ERROR"
        row["error"] = f"{type(e).__name__}: {e}"
    row["time_ms"] = round((time.perf_counter() - t0) * 1000.0, 1)
    if row["verdict"] in (SAFE, UNSAFE) and config.engine != "explicit":
        try:
            ep = encode(load(Path(path).read_text(), config.unwind), width=config.width,
                        prune_links=config.prune_links)
            encode_scheduling(ep)
            mono = ep.cnf.count()
            row["clauses_monolithic"] = mono
            if config.engine == "cegar":
                row["clause_ratio"] = round(row["clauses_initial"] / mono, 4)
        except Exception:  # pragma: no cover - same encoding already succeeded
            pass
    row["ok"] = row["verdict"] == expected
    return row


def run_corpus(directory, config: Config, jobs: int = 1) -> list[dict]:
    files = sorted(Path(directory).glob("*.mtl"))
    items = [(str(f), read_sidecar(f), config) for f in files]
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_corpus_entry, items))
    else:
        rows = [_corpus_entry(i) for i in items]
    return sorted(rows, key=lambda r: r["file"])


def format_table(rows) -> str:
    head = f"{'file':<32} {'expected':<8} {'verdict':<8} {'ok':<3} {'ms':>9} {'iter':>5} {'ratio':>7}"
    lines = [head, "-" * len(head)]
    for r in rows:
        ratio = r.get("clause_ratio")
        lines.append(f"{r['file']:<32} {r['expected']:<8} {r['verdict']:<8} "
                     f"{'yes' if r['ok'] else 'NO':<3} {r['time_ms']:>9.1f} "
                     f"{r.get('iterations', '-')!s:>5} {'-' if ratio is None else f'{ratio:.3f}':>7}")
    return "\n".join(lines)


def cmd_corpus(args) -> int:
    directory = args.dir or os.environ.get("MTL_CORPUS") or str(BUNDLED_CORPUS)
    try:
        config = _config(args)
        rows = run_corpus(directory, config, args.jobs)
    except (SidecarError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    print(format_table(rows))
    bad = [r for r in rows if not r["ok"]]
    ratios = [r["clause_ratio"] for r in rows if r.get("clause_ratio") is not None]
    summary = {
        "directory": str(directory),
        "config": {k: v for k, v in asdict(config).items() if k != "nondet_values"},
        "programs": len(rows),
        "mismatches": [r["file"] for r in bad],
        "mean_clause_ratio": round(sum(ratios) / len(ratios), 4) if ratios else None,
        "total_ms": round(sum(r["time_ms"] for r in rows), 1),
        "results": rows,
    }
    if args.json:
        Path(args.json).write_text(json.dumps(summary, indent=2) + "\n")
    if args.report:
        from .report import write_report
        for path in write_report(rows, args.report):
            print(f"wrote {path}")
    for r in bad:
        extra = f" ({r['error']})" if r.get("error") else ""
        print(f"MISMATCH {r['file']}: expected {r['expected']}, got {r['verdict']}{extra}",
              file=sys.stderr)
    return 1 if bad else 0


# -- tooling subcommands ----------------------------------------------------------------

def cmd_dimacs(args) -> int:
    try:
        p = load(Path(args.file).read_text(encoding="utf-8"), args.unwind)
        ep = encode(p, width=args.int_width, prune_links=not args.no_link_pruning)
    except (FrontendError, OSError, ValueError, EncodingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    comps = ("init", "rho", "zeta", "err")
    if args.monolithic:
        encode_scheduling(ep)
        comps = comps + ("xi",)
    text = ep.cnf.to_dimacs(*comps)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.symbols:
        from .encoder.cnf import symbol_table
        Path(args.symbols).write_text(symbol_table(ep.cnf, ep.symbol_extras()))
    return 0


def cmd_eog(args) -> int:
    try:
        g = EventOrderGraph.loads(Path(args.file).read_text())
    except (OSError, ValueError, KeyError, ContractViolation) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    out = closure(g, reason_cap=args.reason_cap)
    print(f"closure: {out.verdict}")
    if out.infeasible:
        for r in infeasibility_reasons(out):
            print("  reason: {" + ", ".join(sorted(g.name_of(x) for x in r)) + "}")
        for c in refine(out):
            print("  kappa: " + " | ".join(g.name_of(x) for x in c))
    ex = validate_exact(g)
    if ex:
        print("exact: feasible, order " + " ".join(g.events[i].name for i in ex.order))
    else:
        print("exact: infeasible, core {" + ", ".join(g.name_of(x) for x in ex.core) + "}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schedcheck",
                                 description="Bounded verifier for shared-memory MTL programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify one .mtl file")
    v.add_argument("file")
    _add_run_flags(v)
    v.add_argument("--stats", metavar="PATH", help="write statistics JSON")
    v.add_argument("--witness", metavar="PATH", help="write the violating schedule as JSON")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("corpus", help="verify every .mtl file in a directory")
    c.add_argument("dir", nargs="?", help="corpus directory (default: $MTL_CORPUS or bundled)")
    _add_run_flags(c)
    c.add_argument("--jobs", type=int, default=1, metavar="N")
    c.add_argument("--json", metavar="PATH", help="write the aggregate JSON summary")
    c.add_argument("--report", metavar="DIR", help="write summary.csv and PNG figures")
    c.set_defaults(func=cmd_corpus)

    d = sub.add_parser("dimacs", help="export the CNF encoding")
    d.add_argument("file")
    d.add_argument("--unwind", type=int, default=2)
    d.add_argument("--int-width", type=int, default=8)
    d.add_argument("--no-link-pruning", action="store_true")
    d.add_argument("--monolithic", action="store_true", help="include the scheduling constraints")
    d.add_argument("--out", metavar="PATH")
    d.add_argument("--symbols", metavar="PATH", help="write the variable symbol table as JSON")
    d.set_defaults(func=cmd_dimacs)

    e = sub.add_parser("eog", help="analyse an event order graph JSON file")
    e.add_argument("file")
    e.add_argument("--reason-cap", type=int, default=32)
    e.set_defaults(func=cmd_eog)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else 0
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
