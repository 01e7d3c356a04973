"""Search for an undecided-but-infeasible graph and pin it with an embedding program.

Usage: python3 scripts/find_butterfly.py [SEED] [SECONDS]
"""

import json
import sys
from pathlib import Path

from schedcheck.exactorder import validate_exact
from schedcheck.oracle.butterfly import search_butterfly, shape_to_program

PKG = Path(__file__).resolve().parents[1] / "src" / "schedcheck"


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 1
    budget = float(sys.argv[2]) if len(sys.argv) > 2 else 60.0
    found = search_butterfly(seed, budget)
    if found is None:
        print("no instance found within the budget")
        return 1
    shape, g, tried = found
    assert not validate_exact(g)
    doc = g.to_json()
    doc["fork_join"] = shape.to_json()
    doc["search"] = {"seed": seed, "shapes_tried": tried}
    (PKG / "data" / "butterfly_eog.json").write_text(json.dumps(doc, indent=2) + "\n")
    (PKG / "corpus" / "butterfly_fallback.mtl").write_text(shape_to_program(shape))
    (PKG / "corpus" / "butterfly_fallback.expected").write_text("SAFE\n")
    print(f"found after {tried} shapes: {len(g)} events, {len(g.rf)} read-from edges")
    return 0


if __name__ == "__main__":
    sys.exit(main())
