"""Corpus report: a CSV summary plus figures of iterations and clause ratios."""

from __future__ import annotations

import csv
from pathlib import Path

CSV_FIELDS = ("file", "expected", "verdict", "ok", "time_ms", "iterations",
              "clauses_initial", "clauses_monolithic", "clause_ratio", "fallback_invocations")


def write_csv(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return path


def write_figures(rows, outdir) -> list[Path]:
    """Render per-program bar charts; returns the written PNG paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    rows = [r for r in rows if r.get("verdict") in ("SAFE", "UNSAFE")]
    names = [Path(r["file"]).stem for r in rows]
    colors = ["tab:green" if r["verdict"] == "SAFE" else "tab:red" for r in rows]
    out = []

    def bars(values, ylabel, title, fname, hline=None):
        fig, ax = plt.subplots(figsize=(max(6.0, 0.35 * len(names) + 2), 4))
        ax.bar(range(len(values)), values, color=colors)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=75, ha="right", fontsize=7)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        if hline is not None:
            ax.axhline(hline, color="grey", linestyle="--", linewidth=0.8)
        fig.tight_layout()
        path = outdir / fname
        fig.savefig(path, dpi=120)
        plt.close(fig)
        out.append(path)

    bars([r.get("iterations") or 0 for r in rows], "refinements",
         "Refinement iterations (green SAFE, red UNSAFE)", "iterations.png")
    ratios = [r.get("clause_ratio") or 0.0 for r in rows]
    bars(ratios, "abstraction / monolithic clauses", "Clause ratio", "clause_ratio.png", hline=1.0)
    return out


def write_report(rows, outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return [write_csv(rows, outdir / "summary.csv")] + write_figures(rows, outdir)
