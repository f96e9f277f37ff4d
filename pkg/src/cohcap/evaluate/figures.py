"""Figure rendering for the report pipeline.

Turns plotdata tables into static PNG files (grouped bar charts of the
label distribution per group, e.g. per source domain). Display-only
output; uses the Agg backend so it runs headless, and strips volatile
PNG metadata so repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ..core import CoherenceRelation
from .report import ReportTable

_PNG_METADATA = {"Software": None}


def _is_distribution_table(table: ReportTable) -> bool:
    return all(r.value in table.columns for r in CoherenceRelation)


def render_distribution_figure(table: ReportTable, out_path: Path, max_groups: int = 8) -> Path:
    labels = [r.value for r in CoherenceRelation]
    col_idx = {c: i for i, c in enumerate(table.columns)}
    rows = table.rows[:max_groups]

    fig, ax = plt.subplots(figsize=(9, 4.5))
    n_groups = len(rows)
    width = 0.8 / max(1, n_groups)
    for gi, row in enumerate(rows):
        values = [row[col_idx[lab]] for lab in labels]
        positions = [i + gi * width for i in range(len(labels))]
        ax.bar(positions, values, width=width, label=str(row[col_idx["group"]]))
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(labels))])
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("% of pairs")
    ax.set_title(table.name.replace("_", " "))
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out_path, metadata=_PNG_METADATA)
    plt.close(fig)
    return out_path


def render_figures(tables: Sequence[ReportTable], out_dir: str | Path) -> list[Path]:
    """Render a figure for every distribution-shaped table."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for table in tables:
        if _is_distribution_table(table):
            written.append(
                render_distribution_figure(table, out_dir / f"{table.name}.png")
            )
    return written


def render_figures_from_plotdata(plotdata_path: str | Path, out_dir: str | Path) -> list[Path]:
    payload = json.loads(Path(plotdata_path).read_text(encoding="utf-8"))
    tables = [
        ReportTable(name=t["name"], columns=t["columns"], rows=t["rows"])
        for t in payload["tables"]
    ]
    return render_figures(tables, out_dir)
