"""Report emission: distribution/overlap/score tables rendered to
markdown, CSV, and a plotdata JSON consumed by the figure-rendering step.

Output is deterministic: column order is the canonical label order,
groups keep their report order, floats are written with round-trip repr
in CSV/JSON, and no file embeds a timestamp, so the same input always
produces byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..core import CoherenceRelation, MetaFacet
from .stats import DistributionReport, OverlapRate


@dataclass
class ReportTable:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)


def distribution_table(report: DistributionReport, name: str) -> ReportTable:
    columns = (
        ["group", "n_pairs"]
        + [r.value for r in CoherenceRelation]
        + ["n_meta_pairs"]
        + [f.value for f in MetaFacet]
    )
    table = ReportTable(name=name, columns=columns)
    for g in report.groups:
        table.rows.append(
            [g.group, g.n_pairs]
            + [g.label_pct[r.value] for r in CoherenceRelation]
            + [g.n_meta_pairs]
            + [g.facet_pct[f.value] for f in MetaFacet]
        )
    return table


def overlap_table(rates: Sequence[OverlapRate], name: str) -> ReportTable:
    table = ReportTable(
        name=name,
        columns=["label_a", "label_b", "convention", "n_both", "n_denominator", "percent"],
    )
    for r in rates:
        table.rows.append(
            [r.label_a, r.label_b, r.convention, r.n_both, r.n_denominator,
             r.percent if r.percent is not None else "undefined"]
        )
    return table


def _cell_csv(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _cell_md(value) -> str:
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def emit_report(
    tables: Sequence[ReportTable],
    out_dir: str | Path,
    formats: Sequence[str] = ("markdown", "csv", "plotdata-json"),
) -> list[Path]:
    """Write every table in every requested format; returns the manifest.

    An empty table list writes nothing and returns an empty manifest.
    """
    for fmt in formats:
        if fmt not in ("markdown", "csv", "plotdata-json"):
            raise ValueError(f"unknown report format {fmt!r}")
    if not tables:
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "csv" in formats:
        for table in tables:
            path = out_dir / f"{table.name}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(table.columns)
                for row in table.rows:
                    writer.writerow([_cell_csv(v) for v in row])
            written.append(path)

    if "markdown" in formats:
        path = out_dir / "report.md"
        lines: list[str] = []
        for table in tables:
            lines.append(f"## {table.name}")
            lines.append("")
            lines.append("| " + " | ".join(table.columns) + " |")
            lines.append("|" + "|".join(["---"] * len(table.columns)) + "|")
            for row in table.rows:
                lines.append("| " + " | ".join(_cell_md(v) for v in row) + " |")
            lines.append("")
        path.write_text("\n".join(lines), encoding="utf-8")
        written.append(path)

    if "plotdata-json" in formats:
        path = out_dir / "plotdata.json"
        payload = {
            "tables": [
                {"name": t.name, "columns": t.columns, "rows": t.rows} for t in tables
            ]
        }
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        written.append(path)

    return written
