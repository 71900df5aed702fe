"""Command-line behavior: exit codes, output files, config precedence."""

import json
import sys
from pathlib import Path

import pytest

from geopulse.cli import main
from geopulse.lexicon import load_seed_terms
from geopulse.pipeline import read_trend_csv

from .test_runner import ADMIN1, CITIES, COUNTRY_INFO, ECHO_ADAPTER, workdir

assert workdir is not None  # imported pytest fixture


def run_args(workdir, out_name="out", *extra):
    return [
        "run",
        "--country-info", str(COUNTRY_INFO),
        "--admin1", str(ADMIN1),
        "--cities", str(CITIES),
        "--seeds", str(workdir / "seeds.txt"),
        "--tweets", str(workdir / "tweets.ndjson"),
        "--cases", str(workdir / "cases.csv"),
        "--out-dir", str(workdir / out_name),
        "--start-date", "2020-03-23",
        "--end-date", "2020-04-07",
        "--countries", "US,GB",
        *extra,
    ]


class TestUsageErrors:
    def test_no_arguments_exits_1(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand_exits_1(self):
        assert main(["frobnicate"]) == 1

    def test_missing_required_flag_exits_1(self):
        assert main(["build-gazetteer", "--admin1", str(ADMIN1)]) == 1

    def test_help_exits_0(self):
        assert main(["--help"]) == 0

    def test_bad_config_value_exits_1(self, workdir, capsys):
        code = main(run_args(workdir) + ["--sample-k", "0"])
        assert code == 1
        assert "configuration error" in capsys.readouterr().err


class TestBuildGazetteer:
    def test_builds_then_hits_cache(self, tmp_path, capsys):
        cache = tmp_path / "gaz.bin"
        args = [
            "build-gazetteer",
            "--country-info", str(COUNTRY_INFO),
            "--admin1", str(ADMIN1),
            "--cities", str(CITIES),
            "--output", str(cache),
        ]
        assert main(args) == 0
        assert "cache written" in capsys.readouterr().out
        assert cache.is_file()
        assert main(args) == 0
        assert "cache hit" in capsys.readouterr().out

    def test_missing_input_exits_2(self, tmp_path, capsys):
        args = [
            "build-gazetteer",
            "--country-info", str(tmp_path / "absent.txt"),
            "--admin1", str(ADMIN1),
            "--output", str(tmp_path / "gaz.bin"),
        ]
        assert main(args) == 2
        assert "missing input" in capsys.readouterr().err


class TestBuildLexicon:
    def test_output_is_a_consumable_seed_file(self, tmp_path, capsys):
        output = tmp_path / "lexicon.tsv"
        assert main(["build-lexicon", "--output", str(output)]) == 0
        assert "lexicon written" in capsys.readouterr().out
        terms = load_seed_terms(output)
        assert len(terms) > 80
        surfaces = {t.normalized for t in terms}
        assert "recession" in surfaces
        assert "yen" in surfaces

    def test_custom_seeds_only(self, tmp_path):
        seeds = tmp_path / "seeds.txt"
        seeds.write_text("economy\n", encoding="utf-8")
        output = tmp_path / "lexicon.tsv"
        assert main(["build-lexicon", "--seeds", str(seeds),
                     "--output", str(output)]) == 0
        assert len(load_seed_terms(output)) == 1

    def test_missing_seeds_exits_2(self, tmp_path):
        assert main(["build-lexicon", "--seeds", str(tmp_path / "no.txt"),
                     "--output", str(tmp_path / "out.tsv")]) == 2


class TestRunCommand:
    def test_full_run_exits_0(self, workdir, capsys):
        assert main(run_args(workdir)) == 0
        out = capsys.readouterr().out
        assert "trend CSV" in out
        assert (workdir / "out" / "trend.csv").is_file()
        assert (workdir / "out" / "report.json").is_file()
        assert (workdir / "out" / "WORLD.svg").is_file()

    def test_missing_tweets_exits_2(self, workdir):
        (workdir / "tweets.ndjson").unlink()
        assert main(run_args(workdir)) == 2

    def test_empty_corpus_exits_3(self, workdir, capsys):
        (workdir / "tweets.ndjson").write_text("", encoding="utf-8")
        assert main(run_args(workdir)) == 3
        assert "data error" in capsys.readouterr().err

    def test_mostly_malformed_corpus_exits_3(self, workdir):
        (workdir / "tweets.ndjson").write_text(
            "not json\n" * 5 + '{"id": "t1", "created_at": '
            '"2020-03-24T12:00:00+00:00", "text": "x", "lang": "en"}\n',
            encoding="utf-8",
        )
        assert main(run_args(workdir)) == 3

    def test_adapter_crash_exits_4(self, workdir, capsys):
        crash = ("import sys\n"
                 "print('{\"ready\": true, \"model\": \"m\"}', flush=True)\n"
                 "sys.exit(3)\n")
        code = main(run_args(workdir) + [
            "--scorer", "external",
            "--adapter-command", f"{sys.executable} -c '{crash}'",
        ])
        assert code == 4
        assert "external scorer failure" in capsys.readouterr().err

    def test_external_echo_stub_exits_0(self, workdir):
        code = main(run_args(workdir, "ext") + [
            "--scorer", "external",
            "--adapter-command", f"{sys.executable} {ECHO_ADAPTER}",
        ])
        assert code == 0
        rows = read_trend_csv(workdir / "ext" / "trend.csv")
        assert any(r.country_code == "US" for r in rows)


class TestConfigPrecedence:
    def write_config(self, workdir, **extra):
        values = {
            "country_info": str(COUNTRY_INFO),
            "admin1": str(ADMIN1),
            "cities": str(CITIES),
            "seeds": "seeds.txt",
            "tweets": "tweets.ndjson",
            "cases": "cases.csv",
            "out_dir": "out",
            "start_date": "2020-03-23",
            "end_date": "2020-04-07",
            "countries": ["US", "GB"],
            **extra,
        }
        path = workdir / "run.json"
        path.write_text(json.dumps(values), encoding="utf-8")
        return path

    def test_config_file_flag(self, workdir):
        path = self.write_config(workdir)
        assert main(["run", "--config", str(path)]) == 0
        assert (workdir / "out" / "trend.csv").is_file()

    def test_env_var_supplies_config(self, workdir, monkeypatch):
        path = self.write_config(workdir)
        monkeypatch.setenv("GEOPULSE_CONFIG", str(path))
        assert main(["run"]) == 0
        assert (workdir / "out" / "trend.csv").is_file()

    def test_flags_beat_config_file(self, workdir):
        path = self.write_config(workdir, sample_k=5)
        assert main(["run", "--config", str(path),
                     "--sample-k", "1",
                     "--out-dir", str(workdir / "flagged")]) == 0
        rows = read_trend_csv(workdir / "flagged" / "trend.csv")
        world = [r for r in rows if r.country_code == "WORLD"]
        assert world and all(r.n_sampled == 1 for r in world)

    def test_unknown_config_key_exits_1(self, workdir, capsys):
        path = self.write_config(workdir, bogus_knob=1)
        assert main(["run", "--config", str(path)]) == 1
        assert "bogus_knob" in capsys.readouterr().err

    def test_missing_config_file_exits_2(self, workdir):
        assert main(["run", "--config", str(workdir / "absent.json")]) == 2


class TestAnalyze:
    def test_round_trip_on_run_output(self, workdir, capsys):
        assert main(run_args(workdir)) == 0
        capsys.readouterr()
        trend = workdir / "out" / "trend.csv"
        assert main(["analyze", str(trend)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert set(report["countries"]) >= {"US", "GB", "WORLD"}

    def test_output_flag_writes_json_and_prints_table(self, workdir, capsys):
        assert main(run_args(workdir)) == 0
        capsys.readouterr()
        trend = workdir / "out" / "trend.csv"
        target = workdir / "analysis" / "report.json"
        assert main(["analyze", str(trend), "--output", str(target)]) == 0
        out = capsys.readouterr().out
        assert target.is_file()
        assert "WORLD" in out
        report = json.loads(target.read_text(encoding="utf-8"))
        assert report["peak_window"] == [6, 10]

    def test_analysis_matches_run_report(self, workdir):
        assert main(run_args(workdir)) == 0
        trend = workdir / "out" / "trend.csv"
        target = workdir / "report2.json"
        assert main(["analyze", str(trend), "--output", str(target)]) == 0
        first = (workdir / "out" / "report.json").read_text(encoding="utf-8")
        assert target.read_text(encoding="utf-8") == first

    def test_missing_csv_exits_2(self, tmp_path):
        assert main(["analyze", str(tmp_path / "absent.csv")]) == 2

    def test_malformed_csv_exits_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("country_code,week_index\nUS,1\n", encoding="utf-8")
        assert main(["analyze", str(bad)]) == 3
        assert "data error" in capsys.readouterr().err
