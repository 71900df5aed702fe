"""Configuration merging: defaults, JSON file, flag overrides, validation."""

import json
from datetime import date
from pathlib import Path

import pytest

from geopulse.config import (
    DEFAULT_COUNTRIES,
    RunConfig,
    build_config,
    load_config_file,
)
from geopulse.errors import ConfigError, MissingFileError

REQUIRED = {
    "country_info": "ci.txt",
    "admin1": "a1.txt",
    "tweets": "tweets.ndjson",
    "cases": "cases.csv",
    "out_dir": "out",
}


def make(**extra):
    return build_config({**REQUIRED, **extra})


class TestDefaults:
    def test_defaults_fill_unset_fields(self):
        cfg = make()
        assert cfg.sample_k == 10_000
        assert cfg.seed == 0
        assert cfg.countries == DEFAULT_COUNTRIES
        assert cfg.scorer == "lexicon"
        assert cfg.min_city_population == 15000
        assert cfg.drop_retweets is True
        assert cfg.lang == "en"
        assert cfg.peak_window == (6, 10)
        assert cfg.start_date == date(2020, 3, 23)
        assert cfg.end_date == date(2020, 6, 23)

    def test_ten_default_countries(self):
        assert len(DEFAULT_COUNTRIES) == 10

    def test_required_paths_enforced(self):
        with pytest.raises(ConfigError, match="tweets"):
            build_config({k: v for k, v in REQUIRED.items() if k != "tweets"})


class TestCoercion:
    def test_dates_parsed_from_iso_strings(self):
        cfg = make(start_date="2020-04-01", end_date="2020-05-01")
        assert cfg.start_date == date(2020, 4, 1)
        assert cfg.end_date == date(2020, 5, 1)

    def test_bad_date_rejected(self):
        with pytest.raises(ConfigError, match="start_date"):
            make(start_date="04/01/2020")

    def test_countries_accept_comma_string(self):
        assert make(countries="US,GB").countries == ("US", "GB")

    def test_countries_accept_list(self):
        assert make(countries=["US", "GB"]).countries == ("US", "GB")

    def test_adapter_command_split_like_a_shell(self):
        cfg = make(scorer="external",
                   adapter_command="python3 -m tool --flag 'two words'")
        assert cfg.adapter_command == (
            "python3", "-m", "tool", "--flag", "two words",
        )

    def test_adapter_command_accepts_list(self):
        cfg = make(scorer="external", adapter_command=["cmd", "arg"])
        assert cfg.adapter_command == ("cmd", "arg")

    def test_integers_from_strings(self):
        assert make(sample_k="250").sample_k == 250

    def test_boolean_sample_k_rejected(self):
        with pytest.raises(ConfigError, match="sample_k"):
            make(sample_k=True)


class TestValidation:
    def test_dates_must_be_ordered(self):
        with pytest.raises(ConfigError, match="after"):
            make(start_date="2020-06-23", end_date="2020-03-23")

    def test_sample_k_must_be_positive(self):
        with pytest.raises(ConfigError, match="sample_k"):
            make(sample_k=0)

    def test_country_codes_must_be_two_uppercase_letters(self):
        for bad in ("usa", "U1", "u s", "USA"):
            with pytest.raises(ConfigError):
                make(countries=[bad])

    def test_duplicate_countries_rejected(self):
        with pytest.raises(ConfigError, match="duplicates"):
            make(countries=["US", "US"])

    def test_unknown_scorer_rejected(self):
        with pytest.raises(ConfigError, match="scorer"):
            make(scorer="oracle")

    def test_external_scorer_needs_a_command(self):
        with pytest.raises(ConfigError, match="adapter_command"):
            make(scorer="external")

    def test_unknown_keys_named(self):
        with pytest.raises(ConfigError, match="sample_size"):
            build_config({**REQUIRED, "sample_size": 3})

    def test_dead_band_must_be_positive(self):
        with pytest.raises(ConfigError, match="dead_band"):
            make(dead_band=0)

    def test_peak_window_must_be_ordered(self):
        with pytest.raises(ConfigError, match="peak_window"):
            make(peak_window=[10, 6])


class TestConfigFile:
    def test_loads_json_object(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({**REQUIRED, "seed": 7}), encoding="utf-8")
        values = load_config_file(path)
        assert values["seed"] == 7

    def test_missing_file_raises_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_config_file(tmp_path / "absent.json")

    def test_invalid_json_raises_config_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="JSON"):
            load_config_file(path)

    def test_non_object_json_rejected(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="object"):
            load_config_file(path)

    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        cfg = build_config(REQUIRED, config_dir=tmp_path / "conf")
        assert cfg.tweets == tmp_path / "conf" / "tweets.ndjson"

    def test_absolute_paths_left_alone(self, tmp_path):
        cfg = build_config(
            {**REQUIRED, "tweets": "/data/tweets.ndjson"},
            config_dir=tmp_path,
        )
        assert cfg.tweets == Path("/data/tweets.ndjson")


class TestOverrides:
    def test_flags_beat_file_values(self):
        cfg = build_config({**REQUIRED, "seed": 1}, {"seed": 2})
        assert cfg.seed == 2

    def test_none_overrides_are_ignored(self):
        cfg = build_config({**REQUIRED, "seed": 1}, {"seed": None})
        assert cfg.seed == 1

    def test_false_override_is_applied(self):
        cfg = build_config({**REQUIRED, "drop_retweets": True},
                           {"drop_retweets": False})
        assert cfg.drop_retweets is False

    def test_flag_paths_resolve_against_cwd_not_config_dir(self, tmp_path):
        cfg = build_config(REQUIRED, {"tweets": "local.ndjson"},
                           config_dir=tmp_path)
        assert cfg.tweets == Path("local.ndjson")

    def test_unknown_override_named(self):
        with pytest.raises(ConfigError, match="bogus"):
            build_config(REQUIRED, {"bogus": 1})


class TestRunConfigDirect:
    def test_direct_construction_validates(self):
        with pytest.raises(ConfigError):
            RunConfig(
                country_info=Path("ci"),
                admin1=Path("a1"),
                tweets=Path("t"),
                cases=Path("c"),
                out_dir=Path("o"),
                sample_k=0,
            )
