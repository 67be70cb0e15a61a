"""Writing a :class:`~tsdecouple.pipeline.Report` to disk.

Layout::

    report.md          human-readable tables, warnings and the error log
    tables/<key>.csv   one file per table
    plots/<key>.csv    plot data (and <key>.svg when requested)
    manifest.json      config echo, input and output checksums, provenance

Every file is written to a temporary sibling and renamed into place. Output
contains no timestamps or absolute output paths, so identical runs produce
identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import IoError
from .pipeline import Plot, Report, Table
from .unit_root import DF_TABLE_VERSION

__all__ = ["emit_report", "render_markdown", "render_svg"]


def _atomic_write(path: Path, data: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return "" if value is None else str(value)


def table_csv(table: Table) -> str:
    return _csv_text(table.columns, [[c.text() for c in row] for row in table.rows])


def plot_csv(plot: Plot) -> str:
    return _csv_text(plot.columns, [[_fmt(v) for v in row] for row in plot.rows])


def _display(cell) -> str:
    v = cell.value
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if v != 0 and (abs(v) >= 1e6 or abs(v) < 1e-3):
            return f"{v:.4g}"
        return f"{v:.4f}"
    return "" if v is None else str(v)


def render_markdown(report: Report) -> str:
    lines = ["# Tech / non-tech decoupling report", ""]
    if report.cleaning:
        c = report.cleaning
        lines += [
            "## Data",
            "",
            f"- tech rows: {c['tech_rows']} ({c['tech_missing']} missing)",
            f"- non-tech rows: {c['nontech_rows']} ({c['nontech_missing']} missing)",
            f"- aligned observations: {c['rows_out']} "
            f"(of {c['rows_in']} dates, {c['rows_dropped']} dropped)",
            "",
        ]
    for table in report.tables.values():
        lines += [f"## {table.title}", "", "| " + " | ".join(table.columns) + " |"]
        lines.append("|" + "---|" * len(table.columns))
        for row in table.rows:
            lines.append("| " + " | ".join(_display(c) for c in row) + " |")
        for note in table.notes:
            lines.append(f"\n_Note:_ {note}")
        lines.append("")
    if report.warnings:
        lines += ["## Warnings", ""] + [f"- {w}" for w in report.warnings] + [""]
    lines += ["## Stage errors", ""]
    if report.errors:
        for e in report.errors:
            lines.append(f"- `{e.stage}`: {e.error_type}: {e.message}")
    else:
        lines.append("None.")
    lines.append("")
    if report.skipped:
        lines += ["## Skipped stages", ""]
        for e in report.skipped:
            lines.append(f"- `{e.stage}`: {e.message} (root cause: `{e.skipped_because}`)")
        lines.append("")
    return "\n".join(lines)


def render_svg(plot: Plot, width: int = 800, height: int = 320) -> str:
    """Minimal line chart of every numeric column against the row index."""
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#7f7f7f"]
    series = []
    for j, name in enumerate(plot.columns[1:], start=1):
        pts = [(i, row[j]) for i, row in enumerate(plot.rows) if isinstance(row[j], (int, float))]
        if pts:
            series.append((name, pts))
    values = [v for _, pts in series for _, v in pts]
    if not values:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"/>\n'
    lo, hi = min(values), max(values)
    span = (hi - lo) or 1.0
    n = max(len(plot.rows) - 1, 1)
    pad = 30
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{pad}" y="18" font-family="sans-serif" font-size="13">{plot.title}</text>',
    ]
    for k, (name, pts) in enumerate(series):
        coords = " ".join(
            f"{pad + i / n * (width - 2 * pad):.1f},"
            f"{height - pad - (v - lo) / span * (height - 2 * pad):.1f}"
            for i, v in pts
        )
        color = palette[k % len(palette)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{coords}"/>')
        out.append(
            f'<text x="{width - 150}" y="{36 + 14 * k}" font-family="sans-serif" '
            f'font-size="11" fill="{color}">{name}</text>'
        )
    out.append("</svg>\n")
    return "\n".join(out)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def emit_report(report: Report, output_dir, svg: bool | None = None) -> dict[str, Path]:
    """Write all report files and return ``{relative name: path}``."""
    root = Path(output_dir)
    if svg is None:
        svg = report.config.svg
    files: dict[str, str] = {"report.md": render_markdown(report)}
    for key, table in report.tables.items():
        files[f"tables/{key}.csv"] = table_csv(table)
    for key, plot in report.plots.items():
        files[f"plots/{key}.csv"] = plot_csv(plot)
        if svg:
            files[f"plots/{key}.svg"] = render_svg(plot)
    provenance = {
        key: {
            f"{i}:{col}": cell.provenance()
            for i, row in enumerate(table.rows)
            for col, cell in zip(table.columns, row)
            if cell.operation is not None
        }
        for key, table in report.tables.items()
    }
    manifest = {
        "engine": "tsdecouple",
        "engine_version": __version__,
        "df_table_version": DF_TABLE_VERSION,
        "config": report.config.echo(),
        "input_checksums": report.input_checksums,
        "cleaning": report.cleaning,
        "errors": [e.to_dict() for e in report.errors],
        "skipped": [e.to_dict() for e in report.skipped],
        "warnings": report.warnings,
        "outputs": {name: _digest(text) for name, text in sorted(files.items())},
        "provenance": provenance,
    }
    files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    written = {}
    try:
        root.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = root / name
            _atomic_write(path, text)
            written[name] = path
    except OSError as exc:
        raise IoError(f"cannot write report to {root}: {exc}") from exc
    return written
