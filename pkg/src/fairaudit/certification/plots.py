"""Per-attribute metric series and standalone SVG bar charts."""

from __future__ import annotations

import os
from pathlib import Path
from xml.sax.saxutils import escape

from .report import FairnessReport, PlotPoint

WIDTH, HEIGHT = 520, 320
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 56, 16, 36, 40


def plot_data(report: FairnessReport) -> dict[str, list[PlotPoint]]:
    """One series per attribute: (metric, value, ideal, band low, band high)."""
    half = report.verdict.band.half_width
    series = {}
    for audit in report.attribute_audits:
        series[audit.attribute] = [
            PlotPoint(mv.metric_id, mv.value, mv.ideal, mv.ideal - half, mv.ideal + half) for mv in audit.metrics
        ]
    return series


def _nice_range(points: list[PlotPoint]) -> tuple[float, float]:
    lo = min([0.0] + [p.value for p in points] + [p.band_low for p in points])
    hi = max([0.0] + [p.value for p in points] + [p.band_high for p in points])
    pad = 0.05 * (hi - lo or 1.0)
    return lo - pad, hi + pad


def render_svg(title: str, points: list[PlotPoint]) -> str:
    """Bars from zero to each metric value; the shaded strip behind a bar is its band."""
    y_lo, y_hi = _nice_range(points)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def y(v: float) -> float:
        return MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * plot_h

    slot = plot_w / max(len(points), 1)
    bar_w = slot * 0.5
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for i, p in enumerate(points):
        x0 = MARGIN_LEFT + i * slot
        parts.append(
            f'<rect class="band" x="{x0 + slot * 0.1:.2f}" y="{y(p.band_high):.2f}" width="{slot * 0.8:.2f}" '
            f'height="{y(p.band_low) - y(p.band_high):.2f}" fill="#d9ead3"/>'
        )
        parts.append(
            f'<line x1="{x0 + slot * 0.1:.2f}" x2="{x0 + slot * 0.9:.2f}" y1="{y(p.ideal):.2f}" '
            f'y2="{y(p.ideal):.2f}" stroke="#6aa84f" stroke-dasharray="4 3"/>'
        )
        top, bottom = sorted((y(p.value), y(0.0)))
        color = "#3c78d8" if p.in_band else "#cc0000"
        parts.append(
            f'<rect class="bar" data-metric="{p.metric_id}" data-value="{p.value:.6f}" '
            f'x="{x0 + (slot - bar_w) / 2:.2f}" y="{top:.2f}" width="{bar_w:.2f}" '
            f'height="{max(bottom - top, 0.5):.2f}" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{x0 + slot / 2:.2f}" y="{HEIGHT - MARGIN_BOTTOM + 16}" text-anchor="middle">{p.metric_id}</text>'
        )
        parts.append(
            f'<text x="{x0 + slot / 2:.2f}" y="{top - 4:.2f}" text-anchor="middle" font-size="10">{p.value:.4f}</text>'
        )
    parts.append(
        f'<line x1="{MARGIN_LEFT}" x2="{WIDTH - MARGIN_RIGHT}" y1="{y(0.0):.2f}" y2="{y(0.0):.2f}" stroke="black"/>'
    )
    for tick in (y_lo, 0.0, y_hi):
        parts.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{y(tick) + 4:.2f}" text-anchor="end" font-size="10">{tick:.2f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_filename(attribute: str) -> str:
    name = attribute.replace("/", "_").replace(os.sep, "_").strip() or "attribute"
    return f"{name}.svg"


def write_plots(report: FairnessReport, directory: str | os.PathLike) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for attribute, points in plot_data(report).items():
        path = directory / plot_filename(attribute)
        path.write_text(render_svg(attribute, points), encoding="utf-8")
        written.append(path)
    return written
