from __future__ import annotations

import json

from ..sat.dimacs import format_dimacs

#: clause groups of the encoding; the abstraction is init + rho + zeta
COMPONENTS = ("init", "rho", "zeta", "err", "xi")
ABSTRACTION = ("init", "rho", "zeta")


class CnfFormula:
    """Clause database with a named-variable registry and per-component buckets."""

    def __init__(self):
        self.nvars = 0
        self.names: dict[int, str] = {}
        self.components: dict[str, list[list[int]]] = {c: [] for c in COMPONENTS}
        self.current = "rho"
        self.true = self.new_var("TRUE")
        self.add([self.true], "init")

    @property
    def false(self) -> int:
        return -self.true

    def new_var(self, name: str | None = None) -> int:
        self.nvars += 1
        if name is not None:
            self.names[self.nvars] = name
        return self.nvars

    def add(self, clause, component: str | None = None) -> None:
        self.components[component or self.current].append(list(clause))

    def clauses(self, *components: str) -> list[list[int]]:
        out = []
        for c in components or COMPONENTS:
            out.extend(self.components[c])
        return out

    def count(self, *components: str) -> int:
        return sum(len(self.components[c]) for c in components or COMPONENTS)

    def counts(self) -> dict[str, int]:
        return {c: len(v) for c, v in self.components.items()}

    def name_of(self, lit: int) -> str:
        name = self.names.get(abs(lit), f"v{abs(lit)}")
        return name if lit > 0 else f"-{name}"

    def to_dimacs(self, *components: str) -> str:
        comps = components or COMPONENTS
        return format_dimacs(self.nvars, self.clauses(*comps),
                             comments=[f"components: {' '.join(comps)}"])


def symbol_table(cnf: CnfFormula, extra: dict | None = None) -> str:
    """JSON sidecar mapping variables (and extra named literals) to symbols."""
    doc = {"variables": {str(v): n for v, n in sorted(cnf.names.items())}}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)
