"""Trend analysis over the weekly buckets.

Two computations drive the report: Pearson correlation between the
topical-tweet series and the new-case series, and peak detection over
the tweet series with a positive-vs-negative sentiment balance at each
peak.  The peak window summary flags whether every reported peak falls
inside a configured week range.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import ConstantSeriesError
from .pipeline import TrendRow

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 2
DEFAULT_PEAK_WINDOW = (6, 10)


@dataclass(frozen=True)
class TrendSeries:
    country_code: str
    values: tuple[float, ...]


class SentimentBalance(Enum):
    POSITIVE_DOMINANT = "PositiveDominant"
    NEGATIVE_DOMINANT = "NegativeDominant"
    TIED = "Tied"


@dataclass(frozen=True)
class PeakReport:
    week_index: int
    height: float
    sentiment_balance: Optional[SentimentBalance] = None


SeriesLike = Union[TrendSeries, Sequence[float]]


def _values(series: SeriesLike) -> tuple[float, ...]:
    if isinstance(series, TrendSeries):
        return series.values
    return tuple(float(v) for v in series)


def pearson(a: SeriesLike, b: SeriesLike) -> float:
    """Pearson product-moment correlation, in [-1, 1].

    Sums run through math.fsum so the result is stable against
    cancellation on long near-constant series.
    """
    xs = _values(a)
    ys = _values(b)
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise ValueError("correlation needs at least 2 points")
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantSeriesError("a constant series has no defined correlation")
    sxy = math.fsum(p * q for p, q in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def detect_peaks(
    s: SeriesLike,
    k: int,
    *,
    balances: Optional[Mapping[int, tuple[int, int]]] = None,
) -> list[PeakReport]:
    """Top-k strict local maxima, returned in week order.

    An interior week is a peak when strictly greater than both
    neighbors; an endpoint qualifies against its single neighbor.
    Ranking is by height descending with earlier weeks breaking ties.
    `balances` optionally maps week_index to (n_positive, n_negative)
    for the sentiment call at each peak.
    """
    values = _values(s)
    if len(values) < 3:
        raise ValueError("peak detection needs at least 3 points")
    if k < 1:
        raise ValueError("k must be positive")
    maxima: list[tuple[float, int]] = []
    last = len(values) - 1
    for i, v in enumerate(values):
        if i == 0:
            is_peak = v > values[1]
        elif i == last:
            is_peak = v > values[last - 1]
        else:
            is_peak = v > values[i - 1] and v > values[i + 1]
        if is_peak:
            maxima.append((v, i + 1))
    maxima.sort(key=lambda pair: (-pair[0], pair[1]))
    top = sorted(maxima[:k], key=lambda pair: pair[1])
    reports = []
    for height, week in top:
        balance = None
        if balances is not None and week in balances:
            n_positive, n_negative = balances[week]
            if n_positive > n_negative:
                balance = SentimentBalance.POSITIVE_DOMINANT
            elif n_negative > n_positive:
                balance = SentimentBalance.NEGATIVE_DOMINANT
            else:
                balance = SentimentBalance.TIED
        reports.append(PeakReport(week, height, balance))
    return reports


def trend_series(
    rows: Iterable[TrendRow],
    country_code: str,
    n_weeks: int,
    field: str = "n_topical",
) -> TrendSeries:
    """Assemble one country's weekly series; absent weeks become 0."""
    values = [0.0] * n_weeks
    present: set[int] = set()
    for row in rows:
        if row.country_code != country_code:
            continue
        if not 1 <= row.week_index <= n_weeks:
            raise ValueError(f"week {row.week_index} outside the {n_weeks}-week axis")
        values[row.week_index - 1] = float(getattr(row, field))
        present.add(row.week_index)
    missing = sorted(set(range(1, n_weeks + 1)) - present)
    if missing:
        logger.warning(
            "%s: no %s data for weeks %s, imputing 0",
            country_code, field, ", ".join(map(str, missing)),
        )
    return TrendSeries(country_code, tuple(values))


def _case_values(
    rows: Iterable[TrendRow], country_code: str, n_weeks: int
) -> Optional[list[float]]:
    """Weekly case counts, or None when any week lacks a count."""
    values: list[Optional[float]] = [None] * n_weeks
    for row in rows:
        if row.country_code == country_code and row.new_cases is not None:
            values[row.week_index - 1] = float(row.new_cases)
    if any(v is None for v in values):
        return None
    return values  # type: ignore[return-value]


def country_report(
    rows: Sequence[TrendRow],
    country_code: str,
    n_weeks: int,
    *,
    top_k: int = DEFAULT_TOP_K,
    window: tuple[int, int] = DEFAULT_PEAK_WINDOW,
) -> dict:
    """Per-country record: correlation, peaks, and the window summary.

    `pearson_note` explains an absent r: "constant_series" when either
    series has zero variance, "missing_case_data" when any week lacks a
    case count, "too_short" under 2 weeks.  `peaks_in_window` is true
    when at least one peak was found and every reported peak falls
    inside the window.
    """
    tweets = trend_series(rows, country_code, n_weeks)
    balances = {
        row.week_index: (row.n_positive, row.n_negative)
        for row in rows
        if row.country_code == country_code
    }

    r: Optional[float] = None
    cases = _case_values(rows, country_code, n_weeks)
    if n_weeks < 2:
        note = "too_short"
    elif cases is None:
        note = "missing_case_data"
    else:
        try:
            r = pearson(tweets.values, cases)
            note = "ok"
        except ConstantSeriesError:
            note = "constant_series"

    peaks = detect_peaks(tweets, top_k, balances=balances) if n_weeks >= 3 else []
    low, high = window
    in_window = bool(peaks) and all(low <= p.week_index <= high for p in peaks)

    return {
        "country_code": country_code,
        "pearson_r": r,
        "pearson_note": note,
        "peaks": [
            {
                "week_index": p.week_index,
                "height": p.height,
                "sentiment_balance": (
                    p.sentiment_balance.value if p.sentiment_balance else None
                ),
            }
            for p in peaks
        ],
        "peaks_in_window": in_window,
        "peak_window": [low, high],
    }


def build_report(
    rows: Sequence[TrendRow],
    *,
    top_k: int = DEFAULT_TOP_K,
    window: tuple[int, int] = DEFAULT_PEAK_WINDOW,
) -> dict:
    """Full report over every country present in the trend table."""
    n_weeks = max((row.week_index for row in rows), default=0)
    countries = sorted({row.country_code for row in rows})
    return {
        "weeks": n_weeks,
        "peak_window": [window[0], window[1]],
        "countries": {
            country: country_report(
                rows, country, n_weeks, top_k=top_k, window=window
            )
            for country in countries
        },
    }


def render_report_text(report: dict) -> str:
    """Aligned-column text rendering of build_report output."""
    header = ("country", "pearson_r", "note", "peaks", "in_window")
    table = [header]
    for country in sorted(report["countries"]):
        record = report["countries"][country]
        r = record["pearson_r"]
        peaks = " ".join(
            f"w{p['week_index']}({p['sentiment_balance'] or 'n/a'})"
            for p in record["peaks"]
        )
        table.append(
            (
                country,
                "-" if r is None else f"{r:+.4f}",
                record["pearson_note"],
                peaks or "-",
                "yes" if record["peaks_in_window"] else "no",
            )
        )
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in table
    ]
    return "\n".join(lines) + "\n"
