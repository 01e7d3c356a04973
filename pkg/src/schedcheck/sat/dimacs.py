"""DIMACS CNF reading/writing and an external-solver escape hatch."""

from __future__ import annotations

import subprocess
import tempfile
from pathlib import Path


class DimacsError(ValueError):
    pass


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    """Return ``(num_vars, clauses)`` from DIMACS CNF text."""
    nvars = None
    nclauses = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                nvars, nclauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
            elif nvars is not None and abs(lit) > nvars:
                raise DimacsError(f"line {lineno}: literal {lit} exceeds {nvars} variables")
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if nvars is None:
        raise DimacsError("missing 'p cnf' header")
    if nclauses is not None and nclauses != len(clauses):
        raise DimacsError(f"header declares {nclauses} clauses, found {len(clauses)}")
    return nvars, clauses


def format_dimacs(nvars: int, clauses, comments=()) -> str:
    lines = [f"c {c}" for c in comments]
    clauses = list(clauses)
    lines.append(f"p cnf {nvars} {len(clauses)}")
    lines.extend(" ".join(map(str, c)) + " 0" for c in clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(path) -> tuple[int, list[list[int]]]:
    return parse_dimacs(Path(path).read_text())


def write_dimacs(path, nvars: int, clauses, comments=()) -> None:
    Path(path).write_text(format_dimacs(nvars, clauses, comments))


def solve_external(nvars: int, clauses, command: list[str], timeout: float = 60.0):
    """Run an external DIMACS solver; returns ``(sat, model_or_None)``.

    The solver must follow the SAT-competition output convention
    (``s SATISFIABLE`` / ``v ...`` lines).  Used only for cross-checking.
    """
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
        fh.write(format_dimacs(nvars, clauses))
        path = fh.name
    try:
        proc = subprocess.run(command + [path], capture_output=True, text=True, timeout=timeout)
    finally:
        Path(path).unlink(missing_ok=True)
    status, values = None, []
    for line in proc.stdout.splitlines():
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v "):
            values.extend(int(x) for x in line[2:].split())
    if status == "UNSATISFIABLE":
        return False, None
    if status != "SATISFIABLE":
        raise RuntimeError(f"external solver gave no verdict (exit {proc.returncode})")
    model = [False] * (nvars + 1)
    for x in values:
        if x > 0 and x <= nvars:
            model[x] = True
    return True, model
