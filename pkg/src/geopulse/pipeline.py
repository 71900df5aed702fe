"""Corpus-to-buckets pipeline: ingest, schedule, sample, aggregate, join.

The stages are deliberately small pure functions over plain data so the
orchestration layer can shard them.  Order of operations in a run:
ingest NDJSON -> keep records dated on scheduled Tuesdays -> per-day
seeded reservoir sample -> geotag/topical/sentiment (callers attach
those) -> aggregate into weekly per-country buckets -> join case counts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import random
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, TypeVar

from .errors import (
    CorruptCorpusError,
    EmptyRangeError,
    MalformedCsvError,
    MissingFileError,
    UnreadableStreamError,
    UnscheduledDateError,
)
from .gazetteer import LocationTag
from .sentiment import SentimentLabel, SentimentScore

logger = logging.getLogger(__name__)

WORLD = "WORLD"
DEFAULT_SAMPLE_K = 10_000
MALFORMED_FRACTION_LIMIT = 0.10

TREND_HEADER = (
    "country_code",
    "week_index",
    "week_ending",
    "n_sampled",
    "n_topical",
    "n_positive",
    "n_negative",
    "n_neutral",
    "new_cases",
)

T = TypeVar("T")


@dataclass(frozen=True)
class TweetRecord:
    id: str
    created_at: datetime
    text: str
    user_location: Optional[str] = None
    lang: Optional[str] = None
    is_retweet: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("tweet id must be non-empty")


@dataclass
class IngestStats:
    n_lines: int = 0
    n_malformed: int = 0
    n_filtered_lang: int = 0
    n_retweets_dropped: int = 0
    n_duplicates: int = 0
    n_kept: int = 0


@dataclass(frozen=True)
class WeeklyBucket:
    country_code: str
    week_index: int
    n_sampled: int
    n_topical: int
    n_positive: int
    n_negative: int
    n_neutral: int

    def __post_init__(self) -> None:
        if self.week_index < 1:
            raise ValueError("week index starts at 1")
        counts = (self.n_sampled, self.n_topical, self.n_positive,
                  self.n_negative, self.n_neutral)
        if min(counts) < 0:
            raise ValueError("negative count")
        if self.n_positive + self.n_negative + self.n_neutral != self.n_topical:
            raise ValueError("sentiment counts must sum to the topical count")
        if self.n_topical > self.n_sampled:
            raise ValueError("topical count exceeds sampled count")


@dataclass(frozen=True)
class CaseSeries:
    country_code: str
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.values):
            raise ValueError("case counts must be non-negative")


@dataclass(frozen=True)
class TrendRow:
    country_code: str
    week_index: int
    week_ending: date
    n_sampled: int
    n_topical: int
    n_positive: int
    n_negative: int
    n_neutral: int
    new_cases: Optional[int]

    def __post_init__(self) -> None:
        if self.week_index < 1:
            raise ValueError("week index starts at 1")
        counts = (self.n_sampled, self.n_topical, self.n_positive,
                  self.n_negative, self.n_neutral)
        if min(counts) < 0:
            raise ValueError("negative count")
        if self.n_positive + self.n_negative + self.n_neutral != self.n_topical:
            raise ValueError("sentiment counts must sum to the topical count")
        if self.n_topical > self.n_sampled:
            raise ValueError("topical count exceeds sampled count")
        if self.new_cases is not None and self.new_cases < 0:
            raise ValueError("negative case count")


def _parse_created_at(value: object) -> datetime:
    if not isinstance(value, str):
        raise ValueError(f"created_at must be a string, got {value!r}")
    text = value.strip()
    # datetime.fromisoformat in 3.10 rejects a trailing 'Z'
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        return parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def _parse_tweet(line: str, lineno: int) -> Optional[TweetRecord]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        logger.warning("line %d: not valid JSON, skipped", lineno)
        return None
    if not isinstance(obj, dict):
        logger.warning("line %d: not a JSON object, skipped", lineno)
        return None
    raw_id = obj.get("id")
    if isinstance(raw_id, int) and not isinstance(raw_id, bool):
        raw_id = str(raw_id)
    if not isinstance(raw_id, str) or not raw_id:
        logger.warning("line %d: missing or empty id, skipped", lineno)
        return None
    try:
        created_at = _parse_created_at(obj.get("created_at"))
    except ValueError:
        logger.warning("line %d: unparseable created_at, skipped", lineno)
        return None
    text = obj.get("text")
    if not isinstance(text, str):
        logger.warning("line %d: missing text, skipped", lineno)
        return None
    location: Optional[str] = None
    user = obj.get("user")
    if isinstance(user, dict) and isinstance(user.get("location"), str):
        location = user["location"]
    elif isinstance(obj.get("user_location"), str):
        location = obj["user_location"]
    lang = obj.get("lang")
    if not isinstance(lang, str):
        lang = None
    return TweetRecord(
        id=raw_id,
        created_at=created_at,
        text=text,
        user_location=location or None,
        lang=lang,
        is_retweet="retweeted_status" in obj,
    )


def ingest(
    stream: Iterable[bytes | str],
    *,
    lang: Optional[str] = "en",
    drop_retweets: bool = True,
    stats: Optional[IngestStats] = None,
) -> Iterator[TweetRecord]:
    """Yield records from an NDJSON stream in input order.

    Filters apply per record, in this order: a missing or different
    `lang` tag fails the language filter (a record that does not declare
    its language cannot be shown to pass); retweets are dropped when
    requested; a record whose id already passed earlier is a duplicate.
    Malformed lines are skipped with a line-number warning; when the
    stream ends, more than 10% malformed lines raises CorruptCorpus
    since the corpus itself is then suspect.
    """
    if stats is None:
        stats = IngestStats()
    seen: set[str] = set()
    try:
        iterator = iter(stream)
    except TypeError as exc:
        raise UnreadableStreamError(str(exc)) from exc
    lineno = 0
    while True:
        try:
            line = next(iterator)
        except StopIteration:
            break
        except (OSError, UnicodeDecodeError, ValueError) as exc:
            raise UnreadableStreamError(f"line {lineno + 1}: {exc}") from exc
        lineno += 1
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError:
                stats.n_lines += 1
                stats.n_malformed += 1
                logger.warning("line %d: undecodable bytes, skipped", lineno)
                continue
        if not line.strip():
            continue
        stats.n_lines += 1
        record = _parse_tweet(line, lineno)
        if record is None:
            stats.n_malformed += 1
            continue
        if lang is not None and record.lang != lang:
            stats.n_filtered_lang += 1
            continue
        if drop_retweets and record.is_retweet:
            stats.n_retweets_dropped += 1
            continue
        if record.id in seen:
            stats.n_duplicates += 1
            continue
        seen.add(record.id)
        stats.n_kept += 1
        yield record
    if stats.n_lines and stats.n_malformed > stats.n_lines * MALFORMED_FRACTION_LIMIT:
        raise CorruptCorpusError(
            f"{stats.n_malformed} of {stats.n_lines} lines malformed "
            f"(over {MALFORMED_FRACTION_LIMIT:.0%})"
        )


_TUESDAY = 1  # date.weekday() numbering


def tuesday_schedule(start_date: date, end_date: date) -> list[date]:
    """All Tuesdays in [start_date, end_date], ascending.

    Position i (0-based) carries week_index i + 1.
    """
    if start_date > end_date:
        raise ValueError(f"start {start_date} is after end {end_date}")
    current = start_date + timedelta(days=(_TUESDAY - start_date.weekday()) % 7)
    schedule: list[date] = []
    while current <= end_date:
        schedule.append(current)
        current += timedelta(days=7)
    if not schedule:
        raise EmptyRangeError(f"no Tuesday between {start_date} and {end_date}")
    return schedule


def day_seed(seed: int, day: date) -> int:
    """Derive a per-day 64-bit seed so day samples are independent."""
    digest = hashlib.sha256(f"{seed}:{day.isoformat()}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def sample(records: Iterable[T], k: int, seed: int) -> list[T]:
    """Uniform sample without replacement, original order preserved.

    Single-pass reservoir algorithm, so the input may be any iterable;
    the same seed over the same input order always returns the same
    subset.
    """
    if k < 1:
        raise ValueError("sample size must be at least 1")
    rng = random.Random(seed)
    reservoir: list[tuple[int, T]] = []
    for i, record in enumerate(records):
        if i < k:
            reservoir.append((i, record))
        else:
            j = rng.randrange(i + 1)
            if j < k:
                reservoir[j] = (i, record)
    reservoir.sort(key=lambda item: item[0])
    return [record for _, record in reservoir]


ScoredRecord = tuple[
    TweetRecord, Optional[LocationTag], bool, Optional[SentimentScore]
]


def aggregate(
    scored: Iterable[ScoredRecord], schedule: Sequence[date]
) -> list[WeeklyBucket]:
    """Fold scored records into per-(country, week) buckets.

    Every record must be dated on a scheduled day.  Location-unresolved
    records count only toward the WORLD bucket of their week; resolved
    records count toward both their country and WORLD.  A topical record
    must carry a sentiment score, otherwise the bucket invariant
    (positive + negative + neutral = topical) could not hold.
    """
    week_of = {day: i for i, day in enumerate(schedule, start=1)}
    acc: dict[tuple[str, int], list[int]] = {}

    def bump(country: str, week: int, topical: bool,
             sentiment: Optional[SentimentScore]) -> None:
        row = acc.setdefault((country, week), [0, 0, 0, 0, 0])
        row[0] += 1
        if topical:
            row[1] += 1
            if sentiment.label is SentimentLabel.POSITIVE:
                row[2] += 1
            elif sentiment.label is SentimentLabel.NEGATIVE:
                row[3] += 1
            else:
                row[4] += 1

    for record, tag, topical, sentiment in scored:
        day = record.created_at.date()
        week = week_of.get(day)
        if week is None:
            raise UnscheduledDateError(
                f"record {record.id}: {day} is not a scheduled day"
            )
        if topical and sentiment is None:
            raise ValueError(f"record {record.id}: topical but not scored")
        bump(WORLD, week, topical, sentiment)
        if tag is not None:
            bump(tag.country_code, week, topical, sentiment)

    return [
        WeeklyBucket(country, week, *row)
        for (country, week), row in sorted(acc.items())
    ]


def merge_buckets(shards: Iterable[Iterable[WeeklyBucket]]) -> list[WeeklyBucket]:
    """Fieldwise-sum buckets from shard runs; equals a single-shot run."""
    acc: dict[tuple[str, int], list[int]] = {}
    for shard in shards:
        for bucket in shard:
            row = acc.setdefault((bucket.country_code, bucket.week_index),
                                 [0, 0, 0, 0, 0])
            row[0] += bucket.n_sampled
            row[1] += bucket.n_topical
            row[2] += bucket.n_positive
            row[3] += bucket.n_negative
            row[4] += bucket.n_neutral
    return [
        WeeklyBucket(country, week, *row)
        for (country, week), row in sorted(acc.items())
    ]


def _load_cases(cases_csv: str | Path) -> tuple[dict[tuple[str, date], int], set[str]]:
    path = Path(cases_csv)
    if not path.is_file():
        raise MissingFileError(str(path))
    counts: dict[tuple[str, date], int] = {}
    countries: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"date", "country_code", "new_cases"}
        have = set(reader.fieldnames or ())
        if not required <= have:
            missing = ", ".join(sorted(required - have))
            raise MalformedCsvError(f"{path}: missing column(s) {missing}")
        for row in reader:
            try:
                day = date.fromisoformat((row["date"] or "").strip())
                country = (row["country_code"] or "").strip()
                new_cases = int((row["new_cases"] or "").strip())
            except (TypeError, ValueError) as exc:
                raise MalformedCsvError(
                    f"{path} line {reader.line_num}: {exc}"
                ) from exc
            if not country or new_cases < 0:
                raise MalformedCsvError(
                    f"{path} line {reader.line_num}: bad country or case count"
                )
            counts[(country, day)] = counts.get((country, day), 0) + new_cases
            countries.add(country)
    return counts, countries


def join_cases(
    buckets: Iterable[WeeklyBucket],
    cases_csv: str | Path,
    schedule: Sequence[date],
) -> list[TrendRow]:
    """Attach weekly new-case totals to buckets.

    A week's total is the sum over the 7 days ending on its scheduled
    Tuesday, inclusive.  A country absent from the CSV gets an absent
    count, never zero.  The WORLD series uses explicit WORLD rows when
    the CSV has them, otherwise the sum over all listed countries.
    """
    counts, countries = _load_cases(cases_csv)

    def weekly_total(country: str, week_index: int) -> Optional[int]:
        tuesday = schedule[week_index - 1]
        window = [tuesday - timedelta(days=offset) for offset in range(7)]
        if country == WORLD and WORLD not in countries:
            if not countries:
                return None
            return sum(
                counts.get((c, day), 0) for c in countries for day in window
            )
        if country not in countries:
            return None
        return sum(counts.get((country, day), 0) for day in window)

    rows: list[TrendRow] = []
    for bucket in buckets:
        if not 1 <= bucket.week_index <= len(schedule):
            raise UnscheduledDateError(
                f"bucket week {bucket.week_index} outside the schedule"
            )
        rows.append(
            TrendRow(
                country_code=bucket.country_code,
                week_index=bucket.week_index,
                week_ending=schedule[bucket.week_index - 1],
                n_sampled=bucket.n_sampled,
                n_topical=bucket.n_topical,
                n_positive=bucket.n_positive,
                n_negative=bucket.n_negative,
                n_neutral=bucket.n_neutral,
                new_cases=weekly_total(bucket.country_code, bucket.week_index),
            )
        )
    return rows


def write_trend_csv(rows: Iterable[TrendRow], path: str | Path) -> None:
    """Write the trend table; field order is fixed and rows keep their order."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TREND_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.country_code,
                    row.week_index,
                    row.week_ending.isoformat(),
                    row.n_sampled,
                    row.n_topical,
                    row.n_positive,
                    row.n_negative,
                    row.n_neutral,
                    "" if row.new_cases is None else row.new_cases,
                ]
            )


def read_trend_csv(path: str | Path) -> list[TrendRow]:
    """Parse a trend CSV as written by write_trend_csv."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(str(path))
    rows: list[TrendRow] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = set(TREND_HEADER)
        have = set(reader.fieldnames or ())
        if not required <= have:
            missing = ", ".join(sorted(required - have))
            raise MalformedCsvError(f"{path}: missing column(s) {missing}")
        for row in reader:
            try:
                cases_field = (row["new_cases"] or "").strip()
                rows.append(
                    TrendRow(
                        country_code=(row["country_code"] or "").strip(),
                        week_index=int(row["week_index"]),
                        week_ending=date.fromisoformat(row["week_ending"].strip()),
                        n_sampled=int(row["n_sampled"]),
                        n_topical=int(row["n_topical"]),
                        n_positive=int(row["n_positive"]),
                        n_negative=int(row["n_negative"]),
                        n_neutral=int(row["n_neutral"]),
                        new_cases=int(cases_field) if cases_field else None,
                    )
                )
            except (TypeError, ValueError, AttributeError) as exc:
                raise MalformedCsvError(
                    f"{path} line {reader.line_num}: {exc}"
                ) from exc
    return rows
