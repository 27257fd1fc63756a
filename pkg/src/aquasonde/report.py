"""Per-location survey report: plain-text table and SVG chart.

The chart is hand-rolled SVG so the deliverable stays dependency-free
and tests can compare data-point coordinates structurally: every marker
carries ``data-series``, ``data-station``, and ``data-value``
attributes instead of relying on pixel-perfect byte equality.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from xml.sax.saxutils import escape

from . import client
from .samples import (
    PH_NORM_HIGH,
    PH_NORM_LOW,
    TEMP_NORMS,
    EmptyInput,
    Reading,
    StationSummary,
    readings_from_csv,
    summarize_station,
)

# Chart geometry (px).
WIDTH, HEIGHT = 640, 360
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 56, 56, 40, 48
PLOT_W = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_H = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

PH_AXIS = (0.0, 14.0)
TEMP_AXIS = (0.0, 60.0)

TABLE_HEADER = (
    f"{'station':<10} {'n':>3}  {'pH':>6}  {'pH range':<14} {'pH flag':<12} "
    f"{'temp C':>7}  {'temp range':<14} {'temp flag':<12}"
)


def load_readings(source: str) -> list[Reading]:
    """Readings from a service URL or a provenance-variant CSV file."""
    if source.startswith(("http://", "https://")):
        csv_text = client.get_text(
            source.rstrip("/") + "/v1/export.csv?with_provenance=1"
        )
    else:
        csv_text = Path(source).read_text(encoding="utf-8")
    return readings_from_csv(csv_text)


def group_by_station(readings: list[Reading], season: str) -> list[StationSummary]:
    """Summaries per station label, sorted; unlabeled rows group by spot."""
    if not readings:
        raise EmptyInput("no readings in source")
    groups: dict[str, list[Reading]] = {}
    for r in readings:
        label = r.station or f"({r.longitude:.6f},{r.latitude:.6f})"
        groups.setdefault(label, []).append(r)
    summaries = []
    for label in sorted(groups):
        rows = groups[label]
        # Unlabeled rows grouped by spot get the synthetic label.
        normalized = [r if r.station else replace(r, station=label) for r in rows]
        summaries.append(summarize_station(normalized, season))
    return summaries


def station_table(summaries: list[StationSummary], season: str) -> str:
    """Fixed-width per-location table, byte-identical for equal inputs."""
    lines = [f"# per-location summary (season: {season})", TABLE_HEADER]
    for s in summaries:
        lines.append(
            f"{s.station:<10} {s.count:>3}  {s.ph_mean:>6.2f}  "
            f"{s.ph_min:>5.2f}..{s.ph_max:<5.2f}  "
            f"{s.ph_assessment.classification.value:<12} "
            f"{s.temp_mean:>7.2f}  {s.temp_min:>5.2f}..{s.temp_max:<5.2f}  "
            f"{s.temp_assessment.classification.value:<12}".rstrip()
        )
    return "\n".join(lines) + "\n"


def _x(i: int, n: int) -> float:
    return MARGIN_LEFT + (i + 0.5) * PLOT_W / n


def _y_ph(value: float) -> float:
    low, high = PH_AXIS
    return MARGIN_TOP + (high - value) / (high - low) * PLOT_H


def _y_temp(value: float) -> float:
    low, high = TEMP_AXIS
    return MARGIN_TOP + (high - value) / (high - low) * PLOT_H


def chart_svg(summaries: list[StationSummary], season: str) -> str:
    """Self-contained dual-series SVG: pH (left axis) and temperature
    (right axis) per station, with the pH norm lines at 6.5/8.4 and the
    seasonal temperature band shaded."""
    if not summaries:
        raise EmptyInput("no station summaries to chart")
    n = len(summaries)
    band_low, band_high = TEMP_NORMS[season]
    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">'
    )
    parts.append(
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">'
        f"pH and temperature by station (season: {escape(season)})</text>"
    )
    parts.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{PLOT_W}" height="{PLOT_H}" '
        'fill="none" stroke="#888"/>'
    )
    # Seasonal temperature norm band (right-axis scale).
    parts.append(
        f'<rect class="temp-band" data-season="{escape(season)}" '
        f'x="{MARGIN_LEFT}" y="{_y_temp(band_high):.2f}" width="{PLOT_W}" '
        f'height="{_y_temp(band_low) - _y_temp(band_high):.2f}" '
        'fill="#7db8e8" fill-opacity="0.25"/>'
    )
    # pH norm reference lines.
    for bound in (PH_NORM_LOW, PH_NORM_HIGH):
        y = _y_ph(bound)
        parts.append(
            f'<line class="ph-norm" data-value="{bound}" x1="{MARGIN_LEFT}" '
            f'x2="{MARGIN_LEFT + PLOT_W}" y1="{y:.2f}" y2="{y:.2f}" '
            'stroke="#c0392b" stroke-dasharray="6 4"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT + 4}" y="{y - 4:.2f}" fill="#c0392b">pH {bound}</text>'
        )
    # Axes labels and ticks.
    for value in (0, 7, 14):
        y = _y_ph(value)
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">{value}</text>'
        )
    for value in (0, 30, 60):
        y = _y_temp(value)
        parts.append(
            f'<text x="{MARGIN_LEFT + PLOT_W + 8}" y="{y + 4:.2f}">{value}</text>'
        )
    parts.append(
        f'<text x="16" y="{MARGIN_TOP + PLOT_H / 2:.1f}" '
        f'transform="rotate(-90 16 {MARGIN_TOP + PLOT_H / 2:.1f})" '
        'text-anchor="middle">pH</text>'
    )
    parts.append(
        f'<text x="{WIDTH - 14}" y="{MARGIN_TOP + PLOT_H / 2:.1f}" '
        f'transform="rotate(90 {WIDTH - 14} {MARGIN_TOP + PLOT_H / 2:.1f})" '
        'text-anchor="middle">temperature (C)</text>'
    )
    # Series.
    for series, color, y_of, values in (
        ("ph", "#1f6fb2", _y_ph, [s.ph_mean for s in summaries]),
        ("temp", "#d98e04", _y_temp, [s.temp_mean for s in summaries]),
    ):
        points = " ".join(
            f"{_x(i, n):.2f},{y_of(v):.2f}" for i, v in enumerate(values)
        )
        parts.append(
            f'<polyline class="series-{series}" points="{points}" fill="none" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        for i, (summary, value) in enumerate(zip(summaries, values)):
            parts.append(
                f'<circle data-series="{series}" data-station="{escape(summary.station)}" '
                f'data-value="{value:.2f}" cx="{_x(i, n):.2f}" cy="{y_of(value):.2f}" '
                f'r="4" fill="{color}"/>'
            )
    # Station labels.
    for i, summary in enumerate(summaries):
        parts.append(
            f'<text x="{_x(i, n):.2f}" y="{MARGIN_TOP + PLOT_H + 16}" '
            f'text-anchor="middle">{escape(summary.station)}</text>'
        )
    # Legend.
    legend_y = HEIGHT - 10
    parts.append(
        f'<circle cx="{MARGIN_LEFT}" cy="{legend_y - 4}" r="4" fill="#1f6fb2"/>'
        f'<text x="{MARGIN_LEFT + 10}" y="{legend_y}">pH (left)</text>'
        f'<circle cx="{MARGIN_LEFT + 90}" cy="{legend_y - 4}" r="4" fill="#d98e04"/>'
        f'<text x="{MARGIN_LEFT + 100}" y="{legend_y}">temperature (right)</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def generate_report(source: str, out_base: str | Path, season: str = "summer") -> tuple[Path, Path, str]:
    """Write <out_base>.txt and <out_base>.svg; returns paths + table text."""
    readings = load_readings(source)
    summaries = group_by_station(readings, season)
    table = station_table(summaries, season)
    svg = chart_svg(summaries, season)
    base = Path(out_base)
    base.parent.mkdir(parents=True, exist_ok=True)
    table_path = base.with_suffix(".txt")
    svg_path = base.with_suffix(".svg")
    table_path.write_text(table, encoding="utf-8")
    svg_path.write_text(svg, encoding="utf-8")
    return table_path, svg_path, table
