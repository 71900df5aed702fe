"""End-to-end run orchestration behind the command-line interface.

Wires the stages together: gazetteer build (with an on-disk cache),
lexicon build, corpus ingest, per-day sampling, location and topic
tagging, sentiment scoring, weekly aggregation, the case-count join,
and finally the CSV, JSON, and SVG outputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import pickle
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import charts
from .analysis import build_report
from .config import RunConfig
from .errors import AdapterError, EmptyRangeError, MissingFileError
from .gazetteer import (
    DEFAULT_MIN_CITY_POPULATION,
    Gazetteer,
    GeoEntry,
    build_gazetteer,
    load_geonames,
    resolve_location,
)
from .lexicon import (
    TopicLexicon,
    build_lexicon,
    default_country_metadata_path,
    default_seeds_path,
    default_synonyms_path,
    expand_synonyms,
    is_topical,
    load_seed_terms,
    merge_country_metadata,
)
from .pipeline import (
    IngestStats,
    ScoredRecord,
    TweetRecord,
    WORLD,
    aggregate,
    day_seed,
    ingest,
    join_cases,
    sample,
    tuesday_schedule,
    write_trend_csv,
)
from .sentiment import (
    AdapterClient,
    ValenceLexicon,
    default_valence_path,
    load_valence,
    score_lexicon,
)

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"GPGZ1"
TREND_CSV_NAME = "trend.csv"
REPORT_JSON_NAME = "report.json"


@dataclass
class RunResult:
    """Where a run put its outputs, plus ingest bookkeeping."""

    trend_csv: Path
    report_json: Path
    chart_files: list[Path]
    stats: IngestStats
    n_weeks: int
    n_scheduled_records: int
    n_sampled: int


def _input_digest(country_info: Path, admin1: Path,
                  cities: Optional[Path]) -> bytes:
    digest = hashlib.sha256()
    for path in (country_info, admin1, cities):
        if path is None:
            digest.update(b"\x00absent\x00")
        else:
            digest.update(b"\x00file\x00")
            digest.update(path.read_bytes())
    return digest.digest()


def write_gazetteer_cache(
    cache_path: Path,
    entries: Sequence[GeoEntry],
    digest: bytes,
) -> None:
    cache_path.parent.mkdir(parents=True, exist_ok=True)
    payload = CACHE_MAGIC + digest + pickle.dumps(list(entries), protocol=4)
    tmp = cache_path.with_suffix(cache_path.suffix + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, cache_path)


def _read_gazetteer_cache(cache_path: Path, digest: bytes
                          ) -> Optional[list[GeoEntry]]:
    """Entries from a valid, current cache; None means rebuild."""
    try:
        payload = cache_path.read_bytes()
    except OSError:
        return None
    if not payload.startswith(CACHE_MAGIC):
        logger.warning("gazetteer cache %s has wrong magic bytes; rebuilding",
                       cache_path)
        return None
    start = len(CACHE_MAGIC)
    stored = payload[start:start + 32]
    if stored != digest:
        logger.info("gazetteer cache %s is stale; rebuilding", cache_path)
        return None
    try:
        entries = pickle.loads(payload[start + 32:])
    except Exception:
        logger.warning("gazetteer cache %s is corrupted; rebuilding", cache_path)
        return None
    if not isinstance(entries, list) or not all(
        isinstance(e, GeoEntry) for e in entries
    ):
        logger.warning("gazetteer cache %s holds unexpected data; rebuilding",
                       cache_path)
        return None
    return entries


def load_or_build_entries(
    country_info: Path,
    admin1: Path,
    cities: Optional[Path],
    cache_path: Optional[Path] = None,
) -> tuple[list[GeoEntry], bool]:
    """Parsed gazetteer entries, via the cache when it is current.

    Returns `(entries, cache_hit)`.  A hit never rewrites the cache
    file; misses of any kind rebuild from the inputs and, when a cache
    path is given, overwrite it.
    """
    for path, label in ((country_info, "country info"), (admin1, "admin1")):
        if not path.is_file():
            raise MissingFileError(f"{label} file not found: {path}")
    if cities is not None and not cities.is_file():
        raise MissingFileError(f"cities file not found: {cities}")
    digest = _input_digest(country_info, admin1, cities)
    if cache_path is not None and cache_path.exists():
        cached = _read_gazetteer_cache(cache_path, digest)
        if cached is not None:
            logger.info("gazetteer cache hit: %s", cache_path)
            return cached, True
    entries = load_geonames(country_info, admin1, cities)
    if cache_path is not None:
        write_gazetteer_cache(cache_path, entries, digest)
        logger.info("gazetteer cache written: %s", cache_path)
    return entries, False


def build_run_gazetteer(config: RunConfig) -> Gazetteer:
    entries, _ = load_or_build_entries(
        config.country_info, config.admin1, config.cities,
        config.gazetteer_cache,
    )
    return build_gazetteer(entries, min_city_population=config.min_city_population)


def assemble_lexicon_terms(
    seeds: Optional[Path],
    synonyms: Optional[Path],
    country_metadata: Optional[Path],
) -> list:
    """Load and merge the three lexicon layers.

    Unset paths fall back to the packaged files, except that a custom
    seed file does not pull in the packaged synonym or metadata tables:
    those are tuned to the packaged seeds, so a caller overriding the
    seeds gets exactly what they list unless they pass companion tables.
    """
    custom_seeds = seeds is not None
    terms = load_seed_terms(seeds if custom_seeds else default_seeds_path())
    if synonyms is None and not custom_seeds:
        synonyms = default_synonyms_path()
    if synonyms is not None:
        terms = expand_synonyms(terms, synonyms)
    if country_metadata is None and not custom_seeds:
        country_metadata = default_country_metadata_path()
    if country_metadata is not None:
        terms = merge_country_metadata(terms, country_metadata)
    return terms


def build_run_lexicon(config: RunConfig) -> TopicLexicon:
    return build_lexicon(
        assemble_lexicon_terms(config.seeds, config.synonyms,
                               config.country_metadata)
    )


def _load_run_valence(config: RunConfig) -> ValenceLexicon:
    path = config.valence if config.valence is not None else default_valence_path()
    return load_valence(path, negation_window=config.negation_window)


def _collect_scheduled_days(
    config: RunConfig,
    schedule: Sequence[date],
    stats: IngestStats,
) -> tuple[dict[date, list[TweetRecord]], int]:
    """Records grouped by scheduled day, plus the off-schedule drop count."""
    scheduled = set(schedule)
    by_day: dict[date, list[TweetRecord]] = {day: [] for day in schedule}
    n_off_schedule = 0
    with open(config.tweets, "rb") as handle:
        for record in ingest(
            handle,
            lang=config.lang,
            drop_retweets=config.drop_retweets,
            stats=stats,
        ):
            day = record.created_at.date()
            if day in scheduled:
                by_day[day].append(record)
            else:
                n_off_schedule += 1
    return by_day, n_off_schedule


def _score_day(
    records: Sequence[TweetRecord],
    gazetteer: Gazetteer,
    lexicon: TopicLexicon,
    valence: ValenceLexicon,
    config: RunConfig,
    adapter: Optional[AdapterClient],
) -> list[ScoredRecord]:
    scored: list[ScoredRecord] = []
    pending: list[int] = []
    texts: list[tuple[str, str]] = []
    for record in records:
        tag = resolve_location(gazetteer, record.user_location, record.text)
        topical = is_topical(lexicon, record.text,
                             min_matches=config.min_matches).topical
        score = None
        if topical:
            if adapter is None:
                score = score_lexicon(record.text, valence,
                                      dead_band=config.dead_band)
            else:
                pending.append(len(scored))
                texts.append((record.id, record.text))
        scored.append((record, tag, topical, score))
    if texts:
        results = adapter.score(texts)
        for position, (_, score) in zip(pending, results):
            record, tag, topical, _ = scored[position]
            scored[position] = (record, tag, topical, score)
    return scored


def run(config: RunConfig) -> RunResult:
    """Execute a full pipeline run and write all outputs.

    Outputs are written even when no record lands on a scheduled day,
    but that outcome then raises EmptyRange so callers can flag it.
    """
    schedule = tuesday_schedule(config.start_date, config.end_date)
    if not config.tweets.is_file():
        raise MissingFileError(f"tweet file not found: {config.tweets}")
    if not config.cases.is_file():
        raise MissingFileError(f"case file not found: {config.cases}")

    gazetteer = build_run_gazetteer(config)
    lexicon = build_run_lexicon(config)
    valence = _load_run_valence(config)

    stats = IngestStats()
    by_day, n_off_schedule = _collect_scheduled_days(config, schedule, stats)
    n_scheduled = sum(len(records) for records in by_day.values())
    logger.info(
        "ingest: %d kept, %d on scheduled days, %d off schedule",
        stats.n_kept, n_scheduled, n_off_schedule,
    )

    adapter: Optional[AdapterClient] = None
    scored: list[ScoredRecord] = []
    n_days_scored = 0
    try:
        if config.scorer == "external":
            adapter = AdapterClient(
                list(config.adapter_command),
                max_batch=config.max_batch,
                timeout=config.adapter_timeout,
            )
        for day in schedule:
            records = sample(by_day[day], config.sample_k,
                             day_seed(config.seed, day))
            scored.extend(
                _score_day(records, gazetteer, lexicon, valence, config, adapter)
            )
            n_days_scored += 1
    except AdapterError:
        logger.error(
            "external scorer failed after %d of %d scheduled days",
            n_days_scored, len(schedule),
        )
        raise
    finally:
        if adapter is not None:
            adapter.close()

    buckets = aggregate(scored, schedule)
    rows = join_cases(buckets, config.cases, schedule)

    config.out_dir.mkdir(parents=True, exist_ok=True)
    trend_csv = config.out_dir / TREND_CSV_NAME
    write_trend_csv(rows, trend_csv)

    report = build_report(rows, top_k=config.top_k, window=config.peak_window)
    report_json = config.out_dir / REPORT_JSON_NAME
    report_json.write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    chart_countries = list(config.countries)
    if WORLD not in chart_countries:
        chart_countries.append(WORLD)
    chart_files = charts.write_charts(rows, chart_countries, config.out_dir,
                                      len(schedule))

    result = RunResult(
        trend_csv=trend_csv,
        report_json=report_json,
        chart_files=chart_files,
        stats=stats,
        n_weeks=len(schedule),
        n_scheduled_records=n_scheduled,
        n_sampled=len(scored),
    )
    if n_scheduled == 0:
        raise EmptyRangeError(
            "no usable records on any scheduled day; outputs are empty"
        )
    return result
