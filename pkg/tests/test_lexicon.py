from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geopulse.errors import MissingFileError
from geopulse.lexicon import (
    LexiconTerm,
    TermCategory,
    TermOrigin,
    build_lexicon,
    expand_synonyms,
    is_topical,
    load_seed_terms,
    merge_country_metadata,
)

from .oracle import naive_find_all


def seed(surface, category=TermCategory.CORE_ECONOMICS):
    return LexiconTerm(surface, category, TermOrigin.SEED)


class TestLoadSeedTerms:
    def test_basic_parse(self, tmp_path):
        f = tmp_path / "seeds.txt"
        f.write_text("economy\nunemployment\tCoreEconomics\n", encoding="utf-8")
        terms = load_seed_terms(f)
        assert [t.surface for t in terms] == ["economy", "unemployment"]
        assert all(t.origin is TermOrigin.SEED for t in terms)
        assert all(t.category is TermCategory.CORE_ECONOMICS for t in terms)

    def test_comments_and_blanks_skipped(self, tmp_path):
        f = tmp_path / "seeds.txt"
        f.write_text("# header\n\n   \n# another\n", encoding="utf-8")
        assert load_seed_terms(f) == []

    def test_category_column(self, tmp_path):
        f = tmp_path / "seeds.txt"
        f.write_text("yen\tCurrency\nfed\tBankName\n", encoding="utf-8")
        terms = load_seed_terms(f)
        assert terms[0].category is TermCategory.CURRENCY
        assert terms[1].category is TermCategory.BANK_NAME

    def test_unknown_category_rejected_with_line_number(self, tmp_path, caplog):
        f = tmp_path / "seeds.txt"
        f.write_text("economy\nweird\tNotACategory\ntrade\n", encoding="utf-8")
        with caplog.at_level("WARNING"):
            terms = load_seed_terms(f)
        assert [t.surface for t in terms] == ["economy", "trade"]
        assert "line 2" in caplog.text

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_seed_terms(tmp_path / "nope.txt")


class TestExpandSynonyms:
    def test_hand_traced_join(self, tmp_path):
        f = tmp_path / "syn.tsv"
        f.write_text(
            "recession\tdownturn\nrecession\tslump\ngrowth\texpansion\n",
            encoding="utf-8",
        )
        seeds = [seed("recession")]
        out = expand_synonyms(seeds, f)
        # only the recession rows join; growth has no seed
        assert [t.surface for t in out] == ["recession", "downturn", "slump"]
        assert out[1].origin is TermOrigin.SYNONYM_EXPANSION
        assert out[0].origin is TermOrigin.SEED

    def test_empty_table_is_identity(self, tmp_path):
        f = tmp_path / "syn.tsv"
        f.write_text("", encoding="utf-8")
        seeds = [seed("economy"), seed("yen", TermCategory.CURRENCY)]
        assert expand_synonyms(seeds, f) == seeds

    def test_synonym_already_a_seed_appears_once(self, tmp_path):
        f = tmp_path / "syn.tsv"
        f.write_text("recession\tdownturn\n", encoding="utf-8")
        seeds = [seed("recession"), seed("downturn")]
        out = expand_synonyms(seeds, f)
        assert [t.surface for t in out] == ["recession", "downturn"]
        assert out[1].origin is TermOrigin.SEED

    def test_category_preserved_across_expansion(self, tmp_path):
        f = tmp_path / "syn.tsv"
        f.write_text("dollar\tgreenback\ninflation\tprice rise\n", encoding="utf-8")
        seeds = [seed("dollar", TermCategory.CURRENCY), seed("inflation")]
        out = expand_synonyms(seeds, f)
        by_surface = {t.surface: t for t in out}
        assert by_surface["greenback"].category is TermCategory.CURRENCY
        assert by_surface["price rise"].category is TermCategory.CORE_ECONOMICS

    def test_headword_match_uses_normalized_surface(self, tmp_path):
        f = tmp_path / "syn.tsv"
        f.write_text("Recession\tdownturn\n", encoding="utf-8")
        out = expand_synonyms([seed("RECESSION")], f)
        assert [t.surface for t in out] == ["RECESSION", "downturn"]


class TestMergeCountryMetadata:
    def test_currency_and_bank_rows(self, tmp_path):
        f = tmp_path / "meta.tsv"
        f.write_text("JP\tcurrency\tyen\nUS\tbank\tFederal Reserve\n", encoding="utf-8")
        out = merge_country_metadata([], f)
        assert out[0].surface == "yen"
        assert out[0].category is TermCategory.CURRENCY
        assert out[1].normalized == "federal reserve"
        assert out[1].category is TermCategory.BANK_NAME
        assert all(t.origin is TermOrigin.COUNTRY_METADATA for t in out)

    def test_duplicate_currency_collapses(self, tmp_path):
        f = tmp_path / "meta.tsv"
        f.write_text("DE\tcurrency\teuro\nFR\tcurrency\teuro\n", encoding="utf-8")
        out = merge_country_metadata([], f)
        assert [t.surface for t in out] == ["euro"]

    def test_malformed_rows_skipped(self, tmp_path, caplog):
        f = tmp_path / "meta.tsv"
        f.write_text("JP\tcurrency\tyen\nJP\tmascot\tpikachu\nonly one field\n", encoding="utf-8")
        with caplog.at_level("WARNING"):
            out = merge_country_metadata([], f)
        assert [t.surface for t in out] == ["yen"]
        assert "line 2" in caplog.text and "line 3" in caplog.text

    def test_existing_terms_win_dedup(self, tmp_path):
        f = tmp_path / "meta.tsv"
        f.write_text("JP\tcurrency\tyen\n", encoding="utf-8")
        out = merge_country_metadata([seed("yen")], f)
        assert len(out) == 1
        assert out[0].origin is TermOrigin.SEED


class TestBuildAndTopicality:
    def test_pattern_id_term_bijection(self):
        lex = build_lexicon([seed("economy"), seed("yen", TermCategory.CURRENCY)])
        assert len(lex) == 2
        assert lex.term(0).surface == "economy"
        assert lex.term(1).surface == "yen"

    def test_build_dedups_keep_first(self):
        lex = build_lexicon([seed("Economy"), seed("economy")])
        assert len(lex) == 1
        assert lex.term(0).surface == "Economy"

    def test_simple_topical(self):
        lex = build_lexicon([seed("economy")])
        got = is_topical(lex, "the economy is collapsing")
        assert got.topical is True
        assert len(got.matches) == 1

    def test_non_topical(self):
        lex = build_lexicon([seed("economy")])
        got = is_topical(lex, "nice weather today")
        assert got.topical is False
        assert got.matches == []

    def test_word_boundary_blocks_prefix(self):
        lex = build_lexicon([seed("economy")])
        assert is_topical(lex, "economical driving tips").topical is False

    def test_hashtag_matches(self):
        lex = build_lexicon([seed("economy")])
        got = is_topical(lex, "#economy is trending")
        assert got.topical is True

    def test_min_matches_knob(self):
        lex = build_lexicon([seed("economy"), seed("inflation")])
        text = "inflation hurts the economy"
        assert is_topical(lex, text, min_matches=2).topical is True
        assert is_topical(lex, text, min_matches=3).topical is False


TERMS = ["economy", "inflation", "recession", "yen", "euro", "gdp", "trade war"]
FILLER = ["weather", "cats", "sports", "music", "lunch"]


class TestProperties:
    def test_monotonicity_randomized(self):
        rng = random.Random(7)
        for _ in range(200):
            base = rng.sample(TERMS, rng.randint(1, 4))
            extra = rng.choice([t for t in TERMS if t not in base])
            text = " ".join(rng.choice(TERMS + FILLER) for _ in range(rng.randint(1, 12)))
            small = build_lexicon([seed(t) for t in base])
            big = build_lexicon([seed(t) for t in base + [extra]])
            if is_topical(small, text).topical:
                assert is_topical(big, text).topical

    @settings(max_examples=150, deadline=None)
    @given(
        terms=st.lists(
            st.text(alphabet="abcde ", min_size=1, max_size=8).filter(str.strip),
            min_size=1, max_size=20,
        ),
        text=st.text(alphabet="abcde #!", max_size=60),
    )
    def test_oracle_equivalence(self, terms, text):
        unique = []
        seen = set()
        for t in terms:
            term = LexiconTerm(t, TermCategory.CORE_ECONOMICS, TermOrigin.SEED)
            if term.normalized not in seen:
                seen.add(term.normalized)
                unique.append(term)
        lex = build_lexicon(unique)
        got = is_topical(lex, text)
        expected = naive_find_all([t.normalized for t in unique], text)
        assert got.topical == (len(expected) >= 1)
        assert [(m.start, m.pattern_id, m.end) for m in got.matches] == expected
