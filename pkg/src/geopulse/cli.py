"""Command-line entry point.

Subcommands: build-gazetteer, build-lexicon, run, analyze.  Exit codes:
0 success, 1 usage or configuration mistake, 2 missing input file,
3 data error, 4 external scorer failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import runner
from .analysis import build_report, render_report_text
from .config import ENV_CONFIG_VAR, build_config, load_config_file
from .errors import (
    AdapterError,
    ConfigError,
    GeopulseError,
    MissingFileError,
)
from .gazetteer import build_gazetteer
from .lexicon import build_lexicon
from .pipeline import read_trend_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISSING_INPUT = 2
EXIT_DATA_ERROR = 3
EXIT_ADAPTER_FAILURE = 4

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit 1, not argparse's 2."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger().setLevel(level)


def cmd_build_gazetteer(args: argparse.Namespace) -> int:
    entries, hit = runner.load_or_build_entries(
        Path(args.country_info),
        Path(args.admin1),
        Path(args.cities) if args.cities else None,
        Path(args.output),
    )
    gaz = build_gazetteer(entries, min_city_population=args.min_city_population)
    state = "cache hit" if hit else "cache written"
    print(f"{state}: {args.output} ({len(entries)} entries)")
    print(
        f"gazetteer compiles to {len(gaz.entries)} entries at "
        f"min city population {args.min_city_population}"
    )
    return EXIT_OK


def cmd_build_lexicon(args: argparse.Namespace) -> int:
    terms = runner.assemble_lexicon_terms(
        Path(args.seeds) if args.seeds else None,
        Path(args.synonyms) if args.synonyms else None,
        Path(args.country_metadata) if args.country_metadata else None,
    )
    lexicon = build_lexicon(terms)
    output = Path(args.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    with output.open("w", encoding="utf-8") as fh:
        fh.write("# term<TAB>category, consumable as a seed file\n")
        for term in lexicon.terms:
            fh.write(f"{term.surface}\t{term.category.value}\n")
    print(f"lexicon written: {output} ({len(lexicon.terms)} terms)")
    return EXIT_OK


_RUN_FLAG_FIELDS = (
    "country_info", "admin1", "cities", "seeds", "synonyms",
    "country_metadata", "valence", "tweets", "cases", "out_dir",
    "gazetteer_cache", "start_date", "end_date", "sample_k", "seed",
    "countries", "scorer", "adapter_command", "min_city_population",
    "drop_retweets", "min_matches", "dead_band", "negation_window",
    "max_batch", "adapter_timeout", "top_k", "peak_window",
)


def _run_overrides(args: argparse.Namespace) -> dict:
    overrides = {name: getattr(args, name) for name in _RUN_FLAG_FIELDS}
    if args.lang is not None:
        overrides["lang"] = None if args.lang == "any" else args.lang
    return overrides


def cmd_run(args: argparse.Namespace) -> int:
    config_path = args.config or os.environ.get(ENV_CONFIG_VAR)
    file_values = {}
    config_dir: Optional[Path] = None
    if config_path:
        path = Path(config_path)
        file_values = load_config_file(path)
        config_dir = path.parent
    config = build_config(file_values, _run_overrides(args),
                          config_dir=config_dir)
    result = runner.run(config)
    print(f"trend CSV: {result.trend_csv}")
    print(f"report JSON: {result.report_json}")
    print(f"charts: {len(result.chart_files)} files in {config.out_dir}")
    print(
        f"weeks: {result.n_weeks}; records kept: {result.stats.n_kept}; "
        f"on schedule: {result.n_scheduled_records}; "
        f"sampled: {result.n_sampled}"
    )
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    rows = read_trend_csv(args.csv)
    report = build_report(rows, top_k=args.top_k,
                          window=tuple(args.peak_window))
    payload = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.output:
        output = Path(args.output)
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(payload, encoding="utf-8")
        print(f"report JSON: {output}")
        print(render_report_text(report), end="")
    else:
        print(payload, end="")
    return EXIT_OK


def _add_build_gazetteer(sub) -> None:
    p = sub.add_parser("build-gazetteer",
                       help="parse location files into a reusable cache")
    p.add_argument("--country-info", required=True,
                   help="tab-separated country table")
    p.add_argument("--admin1", required=True,
                   help="tab-separated first-level region table")
    p.add_argument("--cities", help="tab-separated city table")
    p.add_argument("--output", required=True, help="cache file to write")
    p.add_argument("--min-city-population", type=int, default=15000)
    p.set_defaults(func=cmd_build_gazetteer)


def _add_build_lexicon(sub) -> None:
    p = sub.add_parser("build-lexicon",
                       help="merge seed terms, synonyms, and country "
                            "metadata into one term table")
    p.add_argument("--seeds", help="seed term file (default: packaged)")
    p.add_argument("--synonyms", help="headword/synonym table")
    p.add_argument("--country-metadata", help="currency and bank table")
    p.add_argument("--output", required=True, help="term table to write")
    p.set_defaults(func=cmd_build_lexicon)


def _add_run(sub) -> None:
    p = sub.add_parser("run", help="execute the full pipeline")
    p.add_argument("--config",
                   help=f"JSON config file (or ${ENV_CONFIG_VAR})")
    p.add_argument("--country-info")
    p.add_argument("--admin1")
    p.add_argument("--cities")
    p.add_argument("--seeds")
    p.add_argument("--synonyms")
    p.add_argument("--country-metadata")
    p.add_argument("--valence")
    p.add_argument("--tweets")
    p.add_argument("--cases")
    p.add_argument("--out-dir")
    p.add_argument("--gazetteer-cache")
    p.add_argument("--start-date")
    p.add_argument("--end-date")
    p.add_argument("--sample-k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--countries", help="comma-separated country codes")
    p.add_argument("--scorer", choices=("lexicon", "external"))
    p.add_argument("--adapter-command",
                   help="external scorer command line (shell-quoted)")
    p.add_argument("--min-city-population", type=int)
    p.add_argument("--drop-retweets", dest="drop_retweets",
                   action="store_const", const=True, default=None)
    p.add_argument("--keep-retweets", dest="drop_retweets",
                   action="store_const", const=False)
    p.add_argument("--lang", help="language tag to keep, or 'any'")
    p.add_argument("--min-matches", type=int)
    p.add_argument("--dead-band", type=float)
    p.add_argument("--negation-window", type=int)
    p.add_argument("--max-batch", type=int)
    p.add_argument("--adapter-timeout", type=float)
    p.add_argument("--top-k", type=int)
    p.add_argument("--peak-window", nargs=2, type=int,
                   metavar=("FIRST", "LAST"))
    p.set_defaults(func=cmd_run)


def _add_analyze(sub) -> None:
    p = sub.add_parser("analyze",
                       help="correlation and peak report from a trend CSV")
    p.add_argument("csv", help="trend CSV as written by run")
    p.add_argument("--output", help="write report JSON here and print a "
                                    "readable table; default prints JSON")
    p.add_argument("--top-k", type=int, default=2)
    p.add_argument("--peak-window", nargs=2, type=int, default=(6, 10),
                   metavar=("FIRST", "LAST"))
    p.set_defaults(func=cmd_analyze)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geopulse",
                     description="Geotagged tweet trends against case counts")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_build_gazetteer(sub)
    _add_build_lexicon(sub)
    _add_run(sub)
    _add_analyze(sub)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except MissingFileError as exc:
        print(f"geopulse: missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except ConfigError as exc:
        print(f"geopulse: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AdapterError as exc:
        print(f"geopulse: external scorer failure: {exc}", file=sys.stderr)
        return EXIT_ADAPTER_FAILURE
    except GeopulseError as exc:
        print(f"geopulse: data error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
