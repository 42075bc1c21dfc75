"""Report model and byte-stable renderers (JSON, CSV, Markdown).

All floats are printed at 6 significant digits.  Non-finite values become
the strings ``"inf"``/``"-inf"`` in JSON.  CSV output holds one table per
section, each introduced by a ``# <section>`` line and separated by a blank
line.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from . import __version__

FORMATS = ("json", "csv", "markdown")


@dataclass(frozen=True)
class Table:
    name: str
    header: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]
    # "columns": render transposed in Markdown (first column becomes the header row).
    markdown_layout: str = "rows"


@dataclass(frozen=True)
class Report:
    command: str
    config_digest: str
    inputs: Mapping[str, Any]
    results: Mapping[str, Any]
    tables: tuple[Table, ...] = ()
    warnings: tuple[str, ...] = ()
    tool_version: str = __version__
    title: str = ""


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = f"{v:.6g}"
    return "0" if s == "-0" else s


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def _canon(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return fmt_float(obj)
        v = float(f"{obj:.6g}")
        return 0.0 if v == 0 else v
    if isinstance(obj, Mapping):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, Sequence):
        return [_canon(v) for v in obj]
    raise TypeError(f"cannot render {type(obj).__name__}")


def _render_json(report: Report) -> str:
    doc = {
        "command": report.command,
        "tool_version": report.tool_version,
        "config_digest": report.config_digest,
        "inputs": report.inputs,
        "results": report.results,
        "warnings": list(report.warnings),
    }
    return json.dumps(_canon(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _render_csv(report: Report) -> str:
    buf = io.StringIO()
    for i, table in enumerate(report.tables):
        if i:
            buf.write("\n")
        buf.write(f"# {table.name}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _md_row(cells: Sequence[str]) -> str:
    return "| " + " | ".join(cells) + " |"


def _md_table(table: Table) -> list[str]:
    if table.markdown_layout == "columns":
        header = [table.header[0], *(_cell(r[0]) for r in table.rows)]
        body = [[h, *(_cell(r[j]) for r in table.rows)] for j, h in enumerate(table.header) if j]
    else:
        header = list(table.header)
        body = [[_cell(v) for v in r] for r in table.rows]
    lines = [_md_row(header), _md_row(["---"] * len(header))]
    lines += [_md_row(r) for r in body]
    return lines


def _render_markdown(report: Report) -> str:
    lines = [f"# {report.title or report.command}", ""]
    lines.append(f"- command: `{report.command}`")
    lines.append(f"- tool version: {report.tool_version}")
    lines.append(f"- config digest: `{report.config_digest}`")
    lines.append("")
    for table in report.tables:
        lines += [f"## {table.name}", ""]
        lines += _md_table(table)
        lines.append("")
    if report.warnings:
        lines += ["## Warnings", ""]
        lines += [f"- {w}" for w in report.warnings]
        lines.append("")
    return "\n".join(lines)


def render_report(report: Report, format: str = "json") -> bytes:
    """Serialize ``report``; equal reports give equal bytes."""
    if format == "json":
        text = _render_json(report)
    elif format == "csv":
        text = _render_csv(report)
    elif format == "markdown":
        text = _render_markdown(report)
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    return text.encode("utf-8")
