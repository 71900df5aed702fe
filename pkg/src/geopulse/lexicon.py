"""Economics topic lexicon: decide whether a tweet talks about the economy.

The lexicon is assembled in three layers: hand-curated seed terms, a
one-hop synonym expansion from an offline-exported headword/synonym
table, and per-country currency and bank names.  All input files are
UTF-8, tab-separated, with '#' comment lines; rows that do not parse are
skipped with a logged warning.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import MissingFileError
from .matcher import Automaton, MatchSpan, PatternSet, normalize_surface

logger = logging.getLogger(__name__)

DEFAULT_MIN_MATCHES = 1


class TermCategory(Enum):
    CORE_ECONOMICS = "CoreEconomics"
    CURRENCY = "Currency"
    BANK_NAME = "BankName"


class TermOrigin(Enum):
    SEED = "Seed"
    SYNONYM_EXPANSION = "SynonymExpansion"
    COUNTRY_METADATA = "CountryMetadata"


_CATEGORY_TOKENS = {c.value: c for c in TermCategory}
_METADATA_KINDS = {"currency": TermCategory.CURRENCY, "bank": TermCategory.BANK_NAME}


@dataclass(frozen=True)
class LexiconTerm:
    surface: str
    category: TermCategory
    origin: TermOrigin

    def __post_init__(self) -> None:
        if not normalize_surface(self.surface):
            raise ValueError(f"term surface normalizes to empty: {self.surface!r}")

    @property
    def normalized(self) -> str:
        return normalize_surface(self.surface)


class TopicLexicon:
    """Immutable compiled lexicon; pattern id i maps to ``terms[i]``."""

    __slots__ = ("terms", "automaton")

    def __init__(self, terms: tuple[LexiconTerm, ...], automaton: Automaton) -> None:
        self.terms = terms
        self.automaton = automaton

    def __len__(self) -> int:
        return len(self.terms)

    def term(self, pattern_id: int) -> LexiconTerm:
        return self.terms[pattern_id]


class TopicalityResult(NamedTuple):
    topical: bool
    matches: list[MatchSpan]


def default_seeds_path() -> Path:
    """The seed-term file shipped with the package."""
    return Path(__file__).parent / "data" / "economics_seeds.txt"


def default_synonyms_path() -> Path:
    """The headword/synonym table shipped with the package."""
    return Path(__file__).parent / "data" / "synonyms.tsv"


def default_country_metadata_path() -> Path:
    """The per-country currency and bank table shipped with the package."""
    return Path(__file__).parent / "data" / "country_metadata.tsv"


def _data_lines(path: str | Path):
    """Yield (line_number, line) for non-blank, non-comment lines."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(str(path))
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line


def load_seed_terms(path: str | Path) -> list[LexiconTerm]:
    """Parse the seed file: one term per line, optional tab-separated category."""
    terms: list[LexiconTerm] = []
    skipped = 0
    for lineno, line in _data_lines(path):
        fields = line.split("\t")
        surface = fields[0].strip()
        category = TermCategory.CORE_ECONOMICS
        if len(fields) > 2:
            logger.warning("%s line %d: too many fields, row skipped", path, lineno)
            skipped += 1
            continue
        if len(fields) == 2:
            token = fields[1].strip()
            if token not in _CATEGORY_TOKENS:
                logger.warning(
                    "%s line %d: unknown category %r, row skipped", path, lineno, token
                )
                skipped += 1
                continue
            category = _CATEGORY_TOKENS[token]
        if not normalize_surface(surface):
            logger.warning("%s line %d: empty term, row skipped", path, lineno)
            skipped += 1
            continue
        terms.append(LexiconTerm(surface, category, TermOrigin.SEED))
    if skipped:
        logger.warning("%s: skipped %d malformed seed rows", path, skipped)
    return terms


def expand_synonyms(
    seeds: list[LexiconTerm], synonym_table: str | Path
) -> list[LexiconTerm]:
    """Add one hop of synonyms for every seed that appears as a headword.

    Synonyms inherit the seed's category.  The result is deduplicated by
    normalized surface with seeds taking precedence, so a synonym that is
    already a seed keeps its Seed origin.
    """
    table: dict[str, list[str]] = {}
    skipped = 0
    for lineno, line in _data_lines(synonym_table):
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            logger.warning(
                "%s line %d: expected headword<TAB>synonym, row skipped",
                synonym_table, lineno,
            )
            skipped += 1
            continue
        head = normalize_surface(fields[0])
        table.setdefault(head, []).append(fields[1].strip())
    if skipped:
        logger.warning("%s: skipped %d malformed synonym rows", synonym_table, skipped)

    out: list[LexiconTerm] = []
    seen: set[str] = set()
    for seed in seeds:
        if seed.normalized not in seen:
            seen.add(seed.normalized)
            out.append(seed)
    for seed in seeds:
        for synonym in table.get(seed.normalized, ()):
            norm = normalize_surface(synonym)
            if not norm or norm in seen:
                continue
            seen.add(norm)
            out.append(LexiconTerm(synonym, seed.category, TermOrigin.SYNONYM_EXPANSION))
    return out


def merge_country_metadata(
    terms: list[LexiconTerm], metadata_path: str | Path
) -> list[LexiconTerm]:
    """Append currency and bank names from "cc<TAB>kind<TAB>name" rows."""
    out = list(terms)
    seen = {t.normalized for t in terms}
    skipped = 0
    for lineno, line in _data_lines(metadata_path):
        fields = line.split("\t")
        if len(fields) != 3:
            logger.warning(
                "%s line %d: expected 3 fields, row skipped", metadata_path, lineno
            )
            skipped += 1
            continue
        _cc, kind_token, name = (f.strip() for f in fields)
        category = _METADATA_KINDS.get(kind_token)
        if category is None or not normalize_surface(name):
            logger.warning(
                "%s line %d: bad kind or name, row skipped", metadata_path, lineno
            )
            skipped += 1
            continue
        norm = normalize_surface(name)
        if norm in seen:
            continue
        seen.add(norm)
        out.append(LexiconTerm(name, category, TermOrigin.COUNTRY_METADATA))
    if skipped:
        logger.warning("%s: skipped %d malformed metadata rows", metadata_path, skipped)
    return out


def build_lexicon(terms: Iterable[LexiconTerm]) -> TopicLexicon:
    """Dedup by normalized surface (first occurrence wins) and compile."""
    kept: list[LexiconTerm] = []
    seen: set[str] = set()
    for t in terms:
        if t.normalized in seen:
            continue
        seen.add(t.normalized)
        kept.append(t)
    automaton = Automaton.compile(
        PatternSet.from_surfaces([t.normalized for t in kept])
    )
    return TopicLexicon(tuple(kept), automaton)


def is_topical(
    lex: TopicLexicon, text: str, *, min_matches: int = DEFAULT_MIN_MATCHES
) -> TopicalityResult:
    """Report whether the text mentions the economy, with the match spans.

    Whole-word matching means a hashtag prefix never blocks a hit:
    "#economy" matches the term "economy" because '#' is not a word
    character.
    """
    matches = lex.automaton.find_all(text)
    return TopicalityResult(len(matches) >= min_matches, matches)
