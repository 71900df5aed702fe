"""Static SVG line charts of the weekly trend table.

One chart per country: topical, positive, and negative tweet counts on
the left axis, new cases on a secondary right axis.  The SVG is built
by hand so output is deterministic byte for byte; no drawing library.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

from .pipeline import TrendRow

WIDTH = 860
HEIGHT = 420
MARGIN_LEFT = 64
MARGIN_RIGHT = 72
MARGIN_TOP = 48
MARGIN_BOTTOM = 56

SERIES_STYLE = (
    ("n_topical", "topical", "#3b5b92"),
    ("n_positive", "positive", "#2f8f4e"),
    ("n_negative", "negative", "#b2412f"),
)
CASES_COLOR = "#8a6d3b"


def _counts(rows: Sequence[TrendRow], country: str, n_weeks: int,
            field: str) -> list[float]:
    values = [0.0] * n_weeks
    for row in rows:
        if row.country_code == country:
            values[row.week_index - 1] = float(getattr(row, field))
    return values


def _cases(rows: Sequence[TrendRow], country: str,
           n_weeks: int) -> list[Optional[float]]:
    values: list[Optional[float]] = [None] * n_weeks
    for row in rows:
        if row.country_code == country and row.new_cases is not None:
            values[row.week_index - 1] = float(row.new_cases)
    return values


def _x(week: int, n_weeks: int) -> float:
    span = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    if n_weeks == 1:
        return MARGIN_LEFT + span / 2
    return MARGIN_LEFT + span * (week - 1) / (n_weeks - 1)


def _y(value: float, top: float) -> float:
    span = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    return MARGIN_TOP + span * (1 - value / top)


def _polyline(points: Iterable[tuple[float, float]], color: str,
              dashed: bool = False) -> str:
    coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="2"{dash} '
        f'points="{coords}"/>'
    )


def _segments(values: Sequence[Optional[float]]) -> list[list[int]]:
    """Runs of consecutive weeks that have a value (1-based indices)."""
    runs: list[list[int]] = []
    current: list[int] = []
    for week, value in enumerate(values, start=1):
        if value is None:
            if current:
                runs.append(current)
                current = []
        else:
            current.append(week)
    if current:
        runs.append(current)
    return runs


def render_chart(rows: Sequence[TrendRow], country: str, n_weeks: int) -> str:
    """Build one country's chart as an SVG document string."""
    if n_weeks < 1:
        raise ValueError("chart needs at least one week")
    series = [
        (label, color, _counts(rows, country, n_weeks, field))
        for field, label, color in SERIES_STYLE
    ]
    cases = _cases(rows, country, n_weeks)
    top_left = max(1.0, max(max(values) for _, _, values in series))
    case_values = [v for v in cases if v is not None]
    top_right = max(1.0, max(case_values)) if case_values else None

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>')
    title = f"{country}: weekly topical tweets, sentiment, and new cases"
    parts.append(
        f'<text x="{MARGIN_LEFT}" y="24" font-family="sans-serif" '
        f'font-size="16" fill="#222222">{escape(title)}</text>'
    )

    plot_bottom = HEIGHT - MARGIN_BOTTOM
    plot_right = WIDTH - MARGIN_RIGHT
    # horizontal grid with left-axis labels, 4 divisions
    for step in range(5):
        value = top_left * step / 4
        y = _y(value, top_left)
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" x2="{plot_right}" '
            f'y2="{y:.2f}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="#555555">'
            f"{value:g}</text>"
        )
        if top_right is not None:
            right_value = top_right * step / 4
            parts.append(
                f'<text x="{plot_right + 8}" y="{y + 4:.2f}" '
                f'text-anchor="start" font-family="sans-serif" font-size="11" '
                f'fill="{CASES_COLOR}">{right_value:g}</text>'
            )

    # x-axis week labels
    label_every = 1 if n_weeks <= 16 else max(1, n_weeks // 16)
    for week in range(1, n_weeks + 1):
        if (week - 1) % label_every == 0 or week == n_weeks:
            x = _x(week, n_weeks)
            parts.append(
                f'<text x="{x:.2f}" y="{plot_bottom + 18}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11" fill="#555555">'
                f"{week}</text>"
            )
    parts.append(
        f'<text x="{(MARGIN_LEFT + plot_right) / 2:.2f}" y="{HEIGHT - 14}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="12" '
        f'fill="#333333">week</text>'
    )

    for label, color, values in series:
        points = [(_x(w, n_weeks), _y(v, top_left))
                  for w, v in enumerate(values, start=1)]
        parts.append(_polyline(points, color))
    if top_right is not None:
        for run in _segments(cases):
            points = [(_x(w, n_weeks), _y(cases[w - 1], top_right)) for w in run]
            if len(points) == 1:
                x, y = points[0]
                parts.append(
                    f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" '
                    f'fill="{CASES_COLOR}"/>'
                )
            else:
                parts.append(_polyline(points, CASES_COLOR, dashed=True))

    legend_entries = [(label, color) for label, color, _ in series]
    legend_entries.append(
        ("new cases" if top_right is not None else "new cases (no data)",
         CASES_COLOR)
    )
    x = MARGIN_LEFT
    for label, color in legend_entries:
        parts.append(
            f'<rect x="{x}" y="34" width="12" height="4" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{x + 16}" y="40" font-family="sans-serif" '
            f'font-size="11" fill="#333333">{escape(label)}</text>'
        )
        x += 16 + 7 * len(label) + 24
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_charts(
    rows: Sequence[TrendRow],
    countries: Iterable[str],
    out_dir: str | Path,
    n_weeks: int,
) -> list[Path]:
    """Write one `<country>.svg` per requested country; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for country in countries:
        path = out_dir / f"{country}.svg"
        path.write_text(render_chart(rows, country, n_weeks), encoding="utf-8")
        written.append(path)
    return written
