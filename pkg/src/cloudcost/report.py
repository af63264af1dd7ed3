"""Report rendering: RFC-4180 CSV and a self-contained static HTML page.

Both formats render the same underlying numbers (2-decimal money, months
as YYYY-MM) and are byte-deterministic for a given report. Charts are
inline SVG; the page makes no network fetches.
"""

from __future__ import annotations

import csv
import html
import io
import math
from typing import Sequence

from . import model as m
from .assess import RadarData
from .engine import CostReport, SummaryRow, rollup
from .money import format_money

CSV_HEADER = ("month", "group", "node", "provider", "region",
              "dimension", "quantity", "unit", "cost")


def _format_quantity(quantity: float) -> str:
    # Daily-walk summation leaves ~1e-14 relative noise on round quantities;
    # snap for display only, never for pricing.
    snapped = round(quantity)
    if quantity == snapped:
        return str(int(snapped))
    if quantity != 0 and abs(quantity - snapped) / max(abs(quantity), 1.0) < 1e-12:
        return str(int(snapped))
    return repr(quantity)


def to_csv(report: CostReport) -> str:
    """Full costing detail, one row per cost line in (month, subject,
    dimension) order. The `node` column carries the line's subject, so
    transfer lines appear under their path id."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(CSV_HEADER)
    for line in sorted(report.lines, key=lambda l: l.sort_key):
        writer.writerow((
            str(line.month),
            line.group or "",
            line.subject,
            line.provider,
            line.region,
            line.dimension,
            _format_quantity(line.quantity),
            line.unit,
            format_money(line.cost),
        ))
    return buffer.getvalue()


# --- HTML --------------------------------------------------------------------

_PAGE_STYLE = """
body { font-family: sans-serif; margin: 2em; color: #222; }
h1, h2 { color: #234; }
table { border-collapse: collapse; margin: 1em 0; }
th, td { border: 1px solid #bbb; padding: 4px 10px; text-align: left; }
td.num { text-align: right; font-variant-numeric: tabular-nums; }
svg { background: #fafafa; border: 1px solid #ddd; }
.warn { color: #a40; }
"""


def _monthly_chart(report: CostReport) -> str:
    totals = report.monthly_totals()
    width, height, pad = 720, 240, 40
    top = max((float(t) for _, t in totals), default=0.0) or 1.0
    n = len(totals)
    step = (width - 2 * pad) / max(n - 1, 1)
    points = []
    circles = []
    for i, (month, total) in enumerate(totals):
        x = pad + i * step
        y = height - pad - (float(total) / top) * (height - 2 * pad)
        points.append(f"{x:.2f},{y:.2f}")
        circles.append(
            f'<circle class="pt" cx="{x:.2f}" cy="{y:.2f}" r="3" '
            f'data-month="{month}" data-total="{format_money(total)}"/>')
    polyline = (f'<polyline fill="none" stroke="#36c" stroke-width="2" '
                f'points="{" ".join(points)}"/>') if n > 1 else ""
    labels = (
        f'<text x="{pad}" y="{height - 12}" font-size="11">{totals[0][0]}</text>'
        f'<text x="{width - pad}" y="{height - 12}" font-size="11" '
        f'text-anchor="end">{totals[-1][0]}</text>'
        f'<text x="{pad}" y="{pad - 8}" font-size="11">max {format_money(max((t for _, t in totals), default=report.grand_total()))}</text>'
    )
    return (f'<svg width="{width}" height="{height}" viewBox="0 0 {width} {height}" '
            f'role="img">{polyline}{"".join(circles)}{labels}</svg>')


def _rollup_table(report: CostReport, by: str, title: str) -> str:
    rows = "".join(
        f"<tr><td>{html.escape(key) or '&mdash;'}</td>"
        f'<td class="num">{format_money(total)}</td></tr>'
        for key, total in rollup(report, by)
    )
    return (f"<h2>{title}</h2><table data-rollup=\"{by}\">"
            f"<tr><th>{by}</th><th>cost</th></tr>{rows}</table>")


def _summary_table(summaries: Sequence[SummaryRow], currency: str) -> str:
    rows = "".join(
        f"<tr><td>{html.escape(row.label)}</td>"
        f'<td class="num">{format_money(row.first_month)}</td>'
        f'<td class="num">{format_money(row.monthly_avg_money())}</td>'
        f'<td class="num">{format_money(row.total)}</td>'
        f'<td class="num">{row.months}</td></tr>'
        for row in summaries
    )
    return (f"<h2>Summary ({html.escape(currency)})</h2><table data-summary=\"1\">"
            "<tr><th>scenario</th><th>1st month</th><th>monthly avg.</th>"
            f"<th>total</th><th>months</th></tr>{rows}</table>")


def _radar_section(radar_data: RadarData) -> str:
    parts = ["<h2>Benefit / risk importance</h2>"]
    for kind, rows in (("benefit", radar_data.benefits), ("risk", radar_data.risks)):
        if not rows:
            continue
        size, radius = 260, 95
        cx = cy = size / 2
        k = len(rows)
        points = []
        spokes = []
        marks = []
        for i, row in enumerate(rows):
            angle = 2 * math.pi * i / k - math.pi / 2
            px = cx + radius * (row.average / 5.0) * math.cos(angle)
            py = cy + radius * (row.average / 5.0) * math.sin(angle)
            points.append(f"{px:.2f},{py:.2f}")
            ex = cx + radius * math.cos(angle)
            ey = cy + radius * math.sin(angle)
            spokes.append(f'<line x1="{cx}" y1="{cy}" x2="{ex:.2f}" y2="{ey:.2f}" '
                          f'stroke="#ccc"/>')
            lx = cx + (radius + 14) * math.cos(angle)
            ly = cy + (radius + 14) * math.sin(angle)
            spokes.append(f'<text x="{lx:.2f}" y="{ly:.2f}" font-size="10" '
                          f'text-anchor="middle">{row.category}</text>')
            marks.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" '
                         f'data-kind="{kind}" data-category="{row.category}" '
                         f'data-average="{row.average:.4f}"/>')
        polygon = (f'<polygon points="{" ".join(points)}" fill="#36c3" stroke="#36c"/>'
                   if k >= 2 else "")
        table_rows = "".join(
            f"<tr><td>{row.category}</td><td class=\"num\">{row.average:.4f}</td>"
            f"<td class=\"num\">{row.item_count}</td></tr>" for row in rows)
        parts.append(
            f"<h3>{kind}s</h3>"
            f'<svg width="{size}" height="{size}" viewBox="0 0 {size} {size}">'
            f'{"".join(spokes)}{polygon}{"".join(marks)}</svg>'
            f'<table data-radar="{kind}"><tr><th>category</th><th>average</th>'
            f"<th>rated items</th></tr>{table_rows}</table>")
    return "".join(parts)


def _topology_section(model: m.DeploymentModel) -> str:
    node_rows = "".join(
        f"<tr><td>{html.escape(node.id)}</td><td>{node.kind}</td>"
        f"<td>{html.escape(node.placement.provider + '/' + node.placement.region) if node.placement else '&mdash;'}</td>"
        f"<td>{html.escape(', '.join(r.kind for r in node.requirements)) or '&mdash;'}</td></tr>"
        for node in model.nodes
    )
    path_rows = "".join(
        f"<tr><td>{html.escape(path.id)}</td>"
        f"<td>{html.escape(path.from_node)} &rarr; {html.escape(path.to_node)}</td>"
        f"<td class=\"num\">{_format_quantity(path.volume.baseline)} GB/month</td></tr>"
        for path in model.paths
    )
    out = (f"<h2>Model topology: {html.escape(model.name)}</h2>"
           f"<table data-topology=\"nodes\"><tr><th>node</th><th>kind</th>"
           f"<th>placement</th><th>resources</th></tr>{node_rows}</table>")
    if path_rows:
        out += (f"<table data-topology=\"paths\"><tr><th>path</th><th>direction</th>"
                f"<th>baseline volume</th></tr>{path_rows}</table>")
    return out


def to_html(report: CostReport, summaries: Sequence[SummaryRow] | None = None,
            radar_data: RadarData | None = None,
            model: m.DeploymentModel | None = None) -> str:
    """Single self-contained page: monthly chart, rollup tables, summary,
    warnings, and (when supplied) the assessment radar and model topology."""
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8"/>',
        "<title>Cloud cost report</title>",
        f"<style>{_PAGE_STYLE}</style></head><body>",
        "<h1>Cloud cost report</h1>",
        f"<p>Window {report.window.start} to {report.window.end} "
        f"({report.window.count} months) &middot; grand total "
        f"<strong>{format_money(report.grand_total())} {html.escape(report.currency)}</strong></p>",
    ]
    if summaries:
        parts.append(_summary_table(summaries, report.currency))
    parts.append("<h2>Monthly total</h2>")
    parts.append(_monthly_chart(report))
    parts.append(_rollup_table(report, "group", "Cost by group"))
    parts.append(_rollup_table(report, "dimension", "Cost by resource dimension"))
    if report.warnings:
        unique = list(dict.fromkeys(report.warnings))
        items = "".join(f'<li class="warn">{html.escape(w)}</li>' for w in unique)
        parts.append(f"<h2>Warnings</h2><ul data-warnings=\"1\">{items}</ul>")
    if radar_data is not None:
        parts.append(_radar_section(radar_data))
    if model is not None:
        parts.append(_topology_section(model))
    parts.append("</body></html>")
    return "\n".join(parts) + "\n"
