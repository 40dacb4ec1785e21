"""Score tables and machine-readable cell dumps.

Tables put one model per row and one training-set size per column, render
F1 as a percentage with two decimals, and bold each column's maximum.
Output is byte-stable for fixed inputs so tables can be golden-file
tested and diffed across runs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from fewhate.runner import EvalReport

MISSING = "-"


def format_score(value: float | None) -> str:
    return MISSING if value is None else f"{value * 100:.2f}"


def render_score_table(
    rows: Sequence[tuple[str, dict[int, float | None]]],
    sizes: Sequence[int],
    label_header: str = "Model",
) -> str:
    """Markdown table of rows x sizes with per-column maxima in bold."""
    best: dict[int, float] = {}
    for size in sizes:
        values = [scores.get(size) for _, scores in rows if scores.get(size) is not None]
        if values:
            best[size] = max(values)
    lines = [
        "| " + " | ".join([label_header, *(str(s) for s in sizes)]) + " |",
        "|" + "---|" * (len(sizes) + 1),
    ]
    for label, scores in rows:
        cells = [label]
        for size in sizes:
            value = scores.get(size)
            text = format_score(value)
            if value is not None and size in best and value == best[size]:
                text = f"**{text}**"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _report_rows(
    reports: Sequence[EvalReport],
    labels: Sequence[str],
    target: str,
    sizes: Sequence[int],
) -> list[tuple[str, dict[int, float | None]]]:
    rows = []
    for label, report in zip(labels, reports):
        aggregates = report.aggregates().get(target, {})
        rows.append((label, {
            size: aggregates.get(str(size), {}).get("mean_f1_hs") for size in sizes
        }))
    return rows


def emit_report(
    reports: Sequence[EvalReport],
    out_dir: str | Path,
    labels: Sequence[str] | None = None,
) -> dict[str, Path]:
    """Write one table per evaluation target plus a per-cell JSONL dump.

    Returns the mapping of artifact name to path.  Accepts one report or
    several; rows follow the given order, columns the union of sizes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if labels is None:
        labels = [r.config["name"] for r in reports]
    if len(labels) != len(reports):
        raise ValueError(f"{len(labels)} labels for {len(reports)} reports")

    sizes = sorted({s for r in reports for s in r.config["sizes"]})
    targets: list[str] = []
    for report in reports:
        for target in report.config["targets"]:
            if target not in targets:
                targets.append(target)

    written: dict[str, Path] = {}
    for target in targets:
        table = render_score_table(_report_rows(reports, labels, target, sizes), sizes)
        path = out_dir / f"table_{target}.md"
        path.write_text(table, "utf-8")
        written[f"table_{target}"] = path

    cells_path = out_dir / "cells.jsonl"
    with open(cells_path, "w", encoding="utf-8") as f:
        for label, report in zip(labels, reports):
            for cell in report.cells:
                f.write(json.dumps({"config": label, **cell.to_json()},
                                   ensure_ascii=False, sort_keys=True) + "\n")
    written["cells"] = cells_path
    return written
