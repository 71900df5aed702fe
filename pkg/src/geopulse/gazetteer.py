"""GeoNames-backed gazetteer: load place names, resolve text to a country.

The three input files follow the GeoNames dump layouts; see
docs/data-formats.md for the exact columns and small fixtures.  Rows that
do not parse are skipped with a logged warning and never abort a load.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .errors import EmptyGazetteerError, MissingFileError
from .matcher import Automaton, MatchSpan, PatternSet, normalize_surface

logger = logging.getLogger(__name__)

_ISO2 = re.compile(r"^[A-Z]{2}$")

DEFAULT_MIN_CITY_POPULATION = 15000


class EntryKind(Enum):
    COUNTRY = "country"
    ADMIN1 = "admin1"
    CITY = "city"
    ALTERNATE = "alternate"


# Resolution rank: a country mention outranks a province, a province
# outranks a city, and alternate spellings rank last.
_KIND_RANK = {
    EntryKind.COUNTRY: 0,
    EntryKind.ADMIN1: 1,
    EntryKind.CITY: 2,
    EntryKind.ALTERNATE: 3,
}


class LocationSource(Enum):
    PROFILE_FIELD = "profile_field"
    TWEET_TEXT = "tweet_text"


@dataclass(frozen=True)
class GeoEntry:
    surface: str
    normalized: str
    kind: EntryKind
    country_code: str
    admin1_code: Optional[str] = None
    population: int = 0

    def __post_init__(self) -> None:
        if not _ISO2.match(self.country_code):
            raise ValueError(f"bad country code {self.country_code!r}")
        if not self.normalized or self.normalized != self.normalized.strip():
            raise ValueError(f"bad normalized surface {self.normalized!r}")
        if self.kind is EntryKind.ADMIN1 and not self.admin1_code:
            raise ValueError("admin1 entry without admin1 code")
        if self.population < 0:
            raise ValueError("negative population")


@dataclass(frozen=True)
class LocationTag:
    country_code: str
    admin1_code: Optional[str]
    source: LocationSource
    matched_surface: str


def _entry(surface: str, kind: EntryKind, cc: str, admin1: Optional[str] = None,
           population: int = 0) -> Optional[GeoEntry]:
    norm = normalize_surface(surface)
    if not norm:
        return None
    return GeoEntry(surface.strip(), norm, kind, cc, admin1, population)


def _read_rows(path: Path):
    """Yield (line_number, columns) for data rows of a tab-separated file."""
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split("\t")


def load_geonames(
    country_info_path: str | Path,
    admin1_path: str | Path,
    cities_path: str | Path | None = None,
) -> list[GeoEntry]:
    """Parse the GeoNames files into a flat entry list.

    Countries contribute their name plus any alternate names; admin1 rows
    contribute the division name; city rows (optional file) contribute the
    city name with its population, used later for threshold filtering.
    """
    country_info_path = Path(country_info_path)
    admin1_path = Path(admin1_path)
    for p in (country_info_path, admin1_path):
        if not p.is_file():
            raise MissingFileError(str(p))
    if cities_path is not None:
        cities_path = Path(cities_path)
        if not cities_path.is_file():
            raise MissingFileError(str(cities_path))

    entries: list[GeoEntry] = []
    warnings = 0

    for lineno, cols in _read_rows(country_info_path):
        if len(cols) < 8 or not _ISO2.match(cols[0]) or not cols[4].strip():
            logger.warning("countryInfo line %d: malformed row skipped", lineno)
            warnings += 1
            continue
        cc = cols[0]
        try:
            population = int(cols[7]) if cols[7].strip() else 0
        except ValueError:
            logger.warning("countryInfo line %d: bad population, row skipped", lineno)
            warnings += 1
            continue
        entry = _entry(cols[4], EntryKind.COUNTRY, cc, population=population)
        if entry:
            entries.append(entry)
        if len(cols) >= 20 and cols[19].strip():
            for alt in cols[19].split(","):
                alt_entry = _entry(alt, EntryKind.ALTERNATE, cc, population=population)
                if alt_entry:
                    entries.append(alt_entry)

    for lineno, cols in _read_rows(admin1_path):
        code = cols[0].split(".")
        if len(cols) < 2 or len(code) != 2 or not _ISO2.match(code[0]) or not code[1]:
            logger.warning("admin1 line %d: malformed row skipped", lineno)
            warnings += 1
            continue
        entry = _entry(cols[1], EntryKind.ADMIN1, code[0], admin1=code[1])
        if entry:
            entries.append(entry)

    if cities_path is not None:
        for lineno, cols in _read_rows(cities_path):
            if len(cols) < 15 or not _ISO2.match(cols[8]) or not cols[1].strip():
                logger.warning("cities line %d: malformed row skipped", lineno)
                warnings += 1
                continue
            try:
                population = int(cols[14]) if cols[14].strip() else 0
            except ValueError:
                logger.warning("cities line %d: bad population, row skipped", lineno)
                warnings += 1
                continue
            admin1 = cols[10].strip() or None
            entry = _entry(cols[1], EntryKind.CITY, cols[8], admin1, population)
            if entry:
                entries.append(entry)

    if warnings:
        logger.warning("gazetteer load: %d malformed rows skipped", warnings)
    return entries


class Gazetteer:
    """Immutable place-name index.  Build via :func:`build_gazetteer`."""

    def __init__(self, entries: tuple[GeoEntry, ...], automaton: Automaton) -> None:
        self.entries = entries
        self.automaton = automaton

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, pattern_id: int) -> GeoEntry:
        return self.entries[pattern_id]

    def find_all(self, text: str) -> list[MatchSpan]:
        return self.automaton.find_all(text)


def build_gazetteer(
    entries: Iterable[GeoEntry],
    min_city_population: int = DEFAULT_MIN_CITY_POPULATION,
) -> Gazetteer:
    """Compile entries into a matchable gazetteer.

    Cities below the population threshold are dropped.  Entries are
    sorted into a canonical order before compiling, so any permutation of
    the same entry list builds an identical gazetteer; duplicate
    normalized surfaces survive with distinct pattern ids and get
    disambiguated at resolve time.
    """
    kept = [
        e
        for e in entries
        if not (e.kind is EntryKind.CITY and e.population < min_city_population)
    ]
    if not kept:
        raise EmptyGazetteerError("no entries survived filtering")
    kept = sorted(
        set(kept),
        key=lambda e: (
            e.normalized,
            _KIND_RANK[e.kind],
            e.country_code,
            e.admin1_code or "",
            -e.population,
            e.surface,
        ),
    )
    automaton = Automaton.compile(
        PatternSet.from_surfaces([e.normalized for e in kept])
    )
    return Gazetteer(tuple(kept), automaton)


def _best_match(gaz: Gazetteer, spans: list[MatchSpan]) -> tuple[GeoEntry, MatchSpan]:
    """Pick the winning candidate under the resolution priority.

    Priority: entry kind, longer matched surface, larger population,
    earlier position; then stable entry attributes so that ties cannot
    depend on input order.
    """
    return min(
        ((gaz.entry(m.pattern_id), m) for m in spans),
        key=lambda cand: (
            _KIND_RANK[cand[0].kind],
            -len(cand[0].normalized),
            -cand[0].population,
            cand[1].start,
            cand[0].country_code,
            cand[0].admin1_code or "",
            cand[0].normalized,
        ),
    )


def resolve_location(
    gaz: Gazetteer,
    profile_location: Optional[str],
    tweet_text: str,
) -> Optional[LocationTag]:
    """Resolve a tweet to a country (and possibly a province).

    The profile field wins outright: the tweet text is only consulted when
    the profile yields no match at all.
    """
    if profile_location:
        spans = gaz.find_all(profile_location)
        if spans:
            entry, _ = _best_match(gaz, spans)
            return LocationTag(
                entry.country_code,
                entry.admin1_code,
                LocationSource.PROFILE_FIELD,
                entry.normalized,
            )
    spans = gaz.find_all(tweet_text)
    if spans:
        entry, _ = _best_match(gaz, spans)
        return LocationTag(
            entry.country_code,
            entry.admin1_code,
            LocationSource.TWEET_TEXT,
            entry.normalized,
        )
    return None
