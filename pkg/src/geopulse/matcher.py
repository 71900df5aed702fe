"""Multi-pattern whole-word matching engine.

This is the shared performance core behind both the place-name gazetteer
and the economics lexicon: compile many surface strings into one automaton,
then report every whole-word, case-insensitive occurrence in a text in a
single pass.

The automaton is a classic Aho-Corasick machine built in three phases:

    1. Insert every pattern into a goto trie, one node per byte of the
       pattern's UTF-8 encoding.
    2. Compute failure links breadth-first: where a node's path fails, the
       link points at the longest proper suffix of that path that is also
       a prefix of some pattern.
    3. Merge output sets down the failure chains, so reaching a node
       reports every pattern ending there, including patterns that are
       suffixes of longer ones.

Running over bytes rather than code points keeps the hot loop cheap in
CPython (iterating a ``bytes`` yields small ints, and the root row can be
a flat 256-slot list).  It is sound because UTF-8 is self-synchronizing: a
pattern's encoding can only ever line up with the text at character
boundaries.

Offsets in :class:`MatchSpan` are byte offsets into the UTF-8 encoding of
the *matched form* of the text: ``normalize(text)`` when the automaton is
case-insensitive, the raw text otherwise.  Case folding can change string
length ("İ" folds to two code points), so reporting spans against the
folded copy is the only way to keep them bit-exact; callers that need the
matched characters should slice ``normalize(text).encode("utf-8")``.

The search memoizes resolved transitions in a flat dict keyed by
``(state << 8) | byte``.  The cache only ever gains entries whose value is
a pure function of the automaton, so concurrent readers under the GIL are
safe; at worst two threads compute the same value.
"""

from __future__ import annotations

import unicodedata
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import EmptyPatternSetError


def normalize(text: str) -> str:
    """Fold *text* for matching: casefold, strip diacritics.

    Runs NFKD decomposition and drops combining marks, so "São Paulo"
    folds to "sao paulo".  Idempotent; length-preserving for ASCII input.
    """
    if text.isascii():
        return text.lower()
    decomposed = unicodedata.normalize("NFKD", text.casefold())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch)).casefold()


def normalize_surface(surface: str) -> str:
    """Fold a pattern surface and tidy its whitespace.

    Unlike :func:`normalize` this strips the ends and collapses internal
    runs, since surfaces come from hand-edited data files.  Never use it
    on text being searched: it shifts offsets.
    """
    return " ".join(normalize(surface).split())


class MatchSpan(NamedTuple):
    """One pattern occurrence: byte offsets into the matched text form."""

    pattern_id: int
    start: int
    end: int


@dataclass(frozen=True)
class PatternSet:
    """An ordered set of pattern surfaces; the index is the pattern id."""

    surfaces: tuple[str, ...]

    def __post_init__(self) -> None:
        for i, s in enumerate(self.surfaces):
            if not s:
                raise ValueError(f"pattern {i} is empty")

    def __len__(self) -> int:
        return len(self.surfaces)

    @classmethod
    def from_surfaces(cls, surfaces: Iterable[str]) -> "PatternSet":
        return cls(tuple(surfaces))


# ASCII bytes that count as word characters.  Bytes >= 0x80 start or
# continue a multi-byte character and take the slow path.
_WORD_BYTE = tuple(chr(b).isalnum() for b in range(128)) + (False,) * 128


def _is_word_char_before(data: bytes, pos: int) -> bool:
    """Is the character ending at byte pos-1 alphanumeric?"""
    if pos == 0:
        return False
    b = data[pos - 1]
    if b < 0x80:
        return _WORD_BYTE[b]
    j = pos - 1
    while data[j] & 0xC0 == 0x80:
        j -= 1
    return data[j:pos].decode("utf-8").isalnum()


def _is_word_char_at(data: bytes, pos: int) -> bool:
    """Is the character starting at byte pos alphanumeric?"""
    if pos >= len(data):
        return False
    b = data[pos]
    if b < 0x80:
        return _WORD_BYTE[b]
    length = 2 if b < 0xE0 else 3 if b < 0xF0 else 4
    return data[pos : pos + length].decode("utf-8").isalnum()


class Automaton:
    """Immutable multi-pattern matcher.  Build via :meth:`compile`."""

    def __init__(
        self,
        goto: list[dict[int, int]],
        fail: list[int],
        out: list[tuple[tuple[int, int], ...]],
        surfaces: tuple[str, ...],
        case_insensitive: bool,
        whole_word: bool,
    ) -> None:
        self._goto = goto
        self._fail = fail
        self._out = out
        self._surfaces = surfaces
        self.case_insensitive = case_insensitive
        self.whole_word = whole_word
        # Flat transition cache seeded with every trie edge; search misses
        # are resolved through the failure chain and memoized here.
        delta: dict[int, int] = {}
        for state, row in enumerate(goto):
            base = state << 8
            for byte, target in row.items():
                delta[base | byte] = target
        self._delta = delta
        root_row = [0] * 256
        for byte, target in goto[0].items():
            root_row[byte] = target
        self._root_row = root_row

    @classmethod
    def compile(
        cls,
        patterns: PatternSet,
        *,
        case_insensitive: bool = True,
        whole_word: bool = True,
    ) -> "Automaton":
        """Build the automaton.  O(total pattern length).

        With ``case_insensitive`` the surfaces are folded with
        :func:`normalize` before insertion, and texts are folded the same
        way at search time.  Duplicate surfaces are allowed and keep their
        distinct pattern ids; deduplication is the caller's job.
        """
        if len(patterns) == 0:
            raise EmptyPatternSetError("cannot compile an empty pattern set")
        surfaces = patterns.surfaces
        if case_insensitive:
            surfaces = tuple(normalize(s) for s in surfaces)
        for i, s in enumerate(surfaces):
            if not s:
                raise ValueError(f"pattern {i} normalizes to the empty string")

        goto: list[dict[int, int]] = [{}]
        out: list[tuple[tuple[int, int], ...]] = [()]
        for pid, surface in enumerate(surfaces):
            data = surface.encode("utf-8")
            state = 0
            for byte in data:
                nxt = goto[state].get(byte)
                if nxt is None:
                    goto.append({})
                    out.append(())
                    nxt = len(goto) - 1
                    goto[state][byte] = nxt
                state = nxt
            out[state] = out[state] + ((pid, len(data)),)

        # Failure links, breadth-first.  Depth-1 nodes fail to the root;
        # deeper nodes follow the parent's failure chain until some state
        # has an edge for the same byte.  Outputs of the failure target
        # are merged in so suffix patterns are reported too.
        fail = [0] * len(goto)
        queue: deque[int] = deque(goto[0].values())
        while queue:
            state = queue.popleft()
            for byte, child in goto[state].items():
                queue.append(child)
                f = fail[state]
                while f and byte not in goto[f]:
                    f = fail[f]
                target = goto[f].get(byte, 0)
                fail[child] = target if target != child else 0
                if out[fail[child]]:
                    out[child] = out[child] + out[fail[child]]
        return cls(goto, fail, out, surfaces, case_insensitive, whole_word)

    def __len__(self) -> int:
        return len(self._surfaces)

    def surface(self, pattern_id: int) -> str:
        """The (folded, if case-insensitive) surface for a pattern id."""
        return self._surfaces[pattern_id]

    def matched_form(self, text: str) -> str:
        """The text form that :meth:`find_all` offsets refer to."""
        return normalize(text) if self.case_insensitive else text

    def find_all(self, text: str) -> list[MatchSpan]:
        """Report every occurrence of every pattern, in one pass.

        Whole-word mode drops occurrences whose adjacent characters are
        Unicode alphanumerics (digits count, so "covid19economy" does not
        contain "economy").  Output is sorted by (start, pattern_id).
        """
        data = self.matched_form(text).encode("utf-8")
        hits: list[MatchSpan] = []
        state = 0
        out = self._out
        goto = self._goto
        fail = self._fail
        delta = self._delta
        delta_get = delta.get
        root_row = self._root_row
        whole_word = self.whole_word
        for i, byte in enumerate(data):
            if state:
                key = (state << 8) | byte
                nxt = delta_get(key)
                if nxt is None:
                    f = state
                    while f and byte not in goto[f]:
                        f = fail[f]
                    nxt = goto[f].get(byte, 0)
                    delta[key] = nxt
                state = nxt
            else:
                state = root_row[byte]
                if not state:
                    continue
            reported = out[state]
            if reported:
                end = i + 1
                if whole_word and _is_word_char_at(data, end):
                    continue
                for pid, plen in reported:
                    start = end - plen
                    if whole_word and _is_word_char_before(data, start):
                        continue
                    hits.append(MatchSpan(pid, start, end))
        hits.sort(key=lambda m: (m.start, m.pattern_id))
        return hits
