"""
Free Gibbs Transport - Report Renderer

Markdown run reports and small SVG plots (line series, density
overlays). Output depends only on the inputs, so regenerating a
report from the same runs gives identical files.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from jinja2 import Template

WIDTH = 480
HEIGHT = 320
MARGIN = 40
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

PLOT_TEMPLATE = """<svg xmlns="http://www.w3.org/2000/svg" \
width="{{ width }}" height="{{ height }}" \
viewBox="0 0 {{ width }} {{ height }}" font-family="sans-serif" font-size="11">
  <rect width="{{ width }}" height="{{ height }}" fill="white"/>
  <text x="{{ width // 2 }}" y="16" text-anchor="middle" font-size="13">{{ title }}</text>
  <line x1="{{ margin }}" y1="{{ height - margin }}" x2="{{ width - margin }}" \
y2="{{ height - margin }}" stroke="black"/>
  <line x1="{{ margin }}" y1="{{ margin }}" x2="{{ margin }}" y2="{{ height - margin }}" \
stroke="black"/>
  <text x="{{ margin }}" y="{{ height - margin + 14 }}">{{ x_range[0] }}</text>
  <text x="{{ width - margin }}" y="{{ height - margin + 14 }}" text-anchor="end">\
{{ x_range[1] }}</text>
  <text x="{{ margin - 4 }}" y="{{ height - margin }}" text-anchor="end">{{ y_range[0] }}</text>
  <text x="{{ margin - 4 }}" y="{{ margin + 4 }}" text-anchor="end">{{ y_range[1] }}</text>
  <text x="{{ width // 2 }}" y="{{ height - 8 }}" text-anchor="middle">{{ xlabel }}</text>
{% for bar in bars %}
  <rect x="{{ bar.x }}" y="{{ bar.y }}" width="{{ bar.w }}" height="{{ bar.h }}" \
fill="#cccccc" stroke="#999999"/>
{% endfor %}
{% for s in series %}
  <polyline fill="none" stroke="{{ s.color }}" stroke-width="1.5" points="{{ s.points }}"/>
  <text x="{{ width - margin - 4 }}" y="{{ margin + 14 * loop.index }}" text-anchor="end" \
fill="{{ s.color }}">{{ s.name }}</text>
{% endfor %}
</svg>
"""

REPORT_TEMPLATE = """# Free Gibbs Transport Report

{% if not sections %}
No runs given.
{% endif %}
{% for section in sections %}
## {{ section.name }} ({{ section.command }})

Status: **{{ section.status or "unknown" }}**
{% if section.missing %}

Missing artifacts:
{% for name in section.missing %}
- `{{ name }}`
{% endfor %}
{% endif %}
{% if section.summary %}

| quantity | value |
|---|---|
{% for key, value in section.summary %}
| {{ key }} | {{ value }} |
{% endfor %}
{% endif %}
{% for table in section.tables %}

### {{ table.name }}

| {{ table.columns | join(" | ") }} |
|{% for _ in table.columns %}---|{% endfor %}

{% for row in table.rows %}
| {{ row | join(" | ") }} |
{% endfor %}
{% if table.truncated %}

({{ table.truncated }} more rows)
{% endif %}
{% endfor %}
{% for svg in section.plots %}

![{{ svg }}]({{ section.path }}/{{ svg }})
{% endfor %}

{% endfor %}
"""


def _fmt(value: float) -> str:
    return f"{value:.4g}"


def _bounds(values: np.ndarray) -> Tuple[float, float]:
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def render_plot(
    series: Dict[str, Tuple[Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    histogram: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
    width: int = WIDTH,
    height: int = HEIGHT,
) -> str:
    """Render line series (and optionally a histogram) as SVG.

    Args:
        series: Name → (xs, ys); drawn in insertion order
        title: Plot title
        xlabel: Horizontal axis label
        histogram: (bin edges, heights) drawn as grey bars underneath
        width: Image width in pixels
        height: Image height in pixels

    Returns:
        SVG document
    """
    xs_all = [np.asarray(xs, dtype=float) for xs, _ in series.values()]
    ys_all = [np.asarray(ys, dtype=float) for _, ys in series.values()]
    if histogram is not None:
        edges, heights = (np.asarray(v, dtype=float) for v in histogram)
        xs_all.append(edges)
        ys_all.append(np.append(heights, 0.0))
    if not xs_all:
        xs_all, ys_all = [np.array([0.0, 1.0])], [np.array([0.0, 1.0])]
    x_lo, x_hi = _bounds(np.concatenate(xs_all))
    y_lo, y_hi = _bounds(np.concatenate(ys_all))
    span_x = width - 2 * MARGIN
    span_y = height - 2 * MARGIN

    def px(x):
        return MARGIN + (np.asarray(x) - x_lo) / (x_hi - x_lo) * span_x

    def py(y):
        return height - MARGIN - (np.asarray(y) - y_lo) / (y_hi - y_lo) * span_y

    lines = []
    for k, (name, (xs, ys)) in enumerate(series.items()):
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(xs), py(ys)))
        lines.append({"name": name, "points": points, "color": PALETTE[k % len(PALETTE)]})
    bars = []
    if histogram is not None:
        left, right = px(edges[:-1]), px(edges[1:])
        top, base = py(heights), py(np.zeros_like(heights))
        for a, b, t, z in zip(left, right, top, base):
            bars.append({"x": f"{a:.2f}", "y": f"{t:.2f}", "w": f"{b - a:.2f}",
                         "h": f"{z - t:.2f}"})

    return Template(PLOT_TEMPLATE, trim_blocks=True).render(
        width=width,
        height=height,
        margin=MARGIN,
        title=title,
        xlabel=xlabel,
        x_range=(_fmt(x_lo), _fmt(x_hi)),
        y_range=(_fmt(y_lo), _fmt(y_hi)),
        series=lines,
        bars=bars,
    )


def render_density_overlay(
    eigenvalues: Sequence[float],
    density: Tuple[Sequence[float], Sequence[float]],
    title: str = "spectrum",
    bins: int = 40,
) -> str:
    """Histogram of pooled eigenvalues under a reference density curve.

    Args:
        eigenvalues: Pooled spectrum
        density: (xs, ρ(xs)) of the reference measure
        title: Plot title
        bins: Histogram bins

    Returns:
        SVG document
    """
    heights, edges = np.histogram(np.asarray(eigenvalues, dtype=float), bins=bins, density=True)
    return render_plot({"reference": density}, title=title, xlabel="x",
                       histogram=(edges, heights))


def _flatten(data: dict, prefix: str = "") -> List[Tuple[str, str]]:
    out = []
    for key in sorted(data):
        value = data[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.extend(_flatten(value, f"{name}."))
        elif isinstance(value, float):
            out.append((name, _fmt(value)))
        elif isinstance(value, (int, str, bool)) or value is None:
            out.append((name, str(value)))
        elif isinstance(value, list) and len(value) <= 8 and all(
            isinstance(v, (int, float)) for v in value
        ):
            out.append((name, ", ".join(_fmt(float(v)) for v in value)))
    return out


def table_section(name: str, rows: List[dict], limit: int = 20) -> dict:
    """Markdown-ready table from CSV rows (first limit rows)."""
    columns = list(rows[0]) if rows else []
    return {
        "name": name,
        "columns": columns,
        "rows": [[row.get(c, "") for c in columns] for row in rows[:limit]],
        "truncated": max(0, len(rows) - limit),
    }


def run_section(
    name: str,
    command: str,
    status: Optional[str],
    path: str,
    summary: Optional[dict] = None,
    tables: Optional[List[dict]] = None,
    plots: Optional[List[str]] = None,
    missing: Optional[List[str]] = None,
) -> dict:
    return {
        "name": name,
        "command": command,
        "status": status,
        "path": path,
        "summary": _flatten(summary or {}),
        "tables": tables or [],
        "plots": plots or [],
        "missing": missing or [],
    }


def render_report(sections: List[dict]) -> str:
    """Render the consolidated markdown report.

    Args:
        sections: Output of run_section, one per run

    Returns:
        Markdown document
    """
    return Template(REPORT_TEMPLATE, trim_blocks=True).render(sections=sections)


__all__ = [
    "render_density_overlay",
    "render_plot",
    "render_report",
    "run_section",
    "table_section",
]
