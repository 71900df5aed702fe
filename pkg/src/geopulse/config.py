"""Run configuration: defaults, JSON config file, command-line overrides.

Precedence is defaults < config file < flags.  The config file is plain
JSON whose keys match the RunConfig field names; relative paths inside
it are resolved against the file's own directory so a config can travel
with its data.
"""

from __future__ import annotations

import json
import shlex
from dataclasses import dataclass, fields
from datetime import date
from pathlib import Path
from typing import Any, Mapping, Optional

from .errors import ConfigError, MissingFileError
from .pipeline import DEFAULT_SAMPLE_K

ENV_CONFIG_VAR = "GEOPULSE_CONFIG"

DEFAULT_COUNTRIES = ("US", "CN", "JP", "DE", "IN", "GB", "FR", "IT", "BR", "CA")
DEFAULT_START = date(2020, 3, 23)
DEFAULT_END = date(2020, 6, 23)

_PATH_FIELDS = frozenset({
    "country_info", "admin1", "cities", "seeds", "synonyms",
    "country_metadata", "valence", "tweets", "cases", "out_dir",
    "gazetteer_cache",
})
_REQUIRED_PATHS = ("country_info", "admin1", "tweets", "cases", "out_dir")


@dataclass(frozen=True)
class RunConfig:
    """Everything one `run` invocation needs, fully validated."""

    country_info: Path
    admin1: Path
    tweets: Path
    cases: Path
    out_dir: Path
    cities: Optional[Path] = None
    seeds: Optional[Path] = None
    synonyms: Optional[Path] = None
    country_metadata: Optional[Path] = None
    valence: Optional[Path] = None
    gazetteer_cache: Optional[Path] = None
    start_date: date = DEFAULT_START
    end_date: date = DEFAULT_END
    sample_k: int = DEFAULT_SAMPLE_K
    seed: int = 0
    countries: tuple[str, ...] = DEFAULT_COUNTRIES
    scorer: str = "lexicon"
    adapter_command: tuple[str, ...] = ()
    min_city_population: int = 15000
    drop_retweets: bool = True
    lang: Optional[str] = "en"
    min_matches: int = 1
    dead_band: float = 0.05
    negation_window: int = 3
    max_batch: int = 64
    adapter_timeout: float = 60.0
    top_k: int = 2
    peak_window: tuple[int, int] = (6, 10)

    def __post_init__(self) -> None:
        if self.start_date > self.end_date:
            raise ConfigError(
                f"start_date {self.start_date} is after end_date {self.end_date}"
            )
        if self.sample_k < 1:
            raise ConfigError(f"sample_k must be at least 1, got {self.sample_k}")
        for code in self.countries:
            if len(code) != 2 or not code.isalpha() or not code.isupper():
                raise ConfigError(
                    f"countries entries must be two-letter uppercase codes, "
                    f"got {code!r}"
                )
        if len(set(self.countries)) != len(self.countries):
            raise ConfigError("countries list contains duplicates")
        if self.scorer not in ("lexicon", "external"):
            raise ConfigError(
                f"scorer must be 'lexicon' or 'external', got {self.scorer!r}"
            )
        if self.scorer == "external" and not self.adapter_command:
            raise ConfigError("scorer 'external' requires adapter_command")
        if self.min_city_population < 0:
            raise ConfigError("min_city_population must be non-negative")
        if self.min_matches < 1:
            raise ConfigError("min_matches must be at least 1")
        if self.dead_band <= 0:
            raise ConfigError("dead_band must be positive")
        if self.negation_window < 1:
            raise ConfigError("negation_window must be at least 1")
        if self.max_batch < 1:
            raise ConfigError("max_batch must be at least 1")
        if self.adapter_timeout <= 0:
            raise ConfigError("adapter_timeout must be positive")
        if self.top_k < 1:
            raise ConfigError("top_k must be at least 1")
        lo, hi = self.peak_window
        if not (1 <= lo <= hi):
            raise ConfigError(f"peak_window {self.peak_window} is not ordered")


_FIELD_NAMES = frozenset(f.name for f in fields(RunConfig))


def _coerce(name: str, value: Any, base_dir: Optional[Path]) -> Any:
    if name in _PATH_FIELDS:
        if value is None:
            return None
        path = Path(value)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return path
    if name in ("start_date", "end_date"):
        if isinstance(value, date):
            return value
        try:
            return date.fromisoformat(str(value))
        except ValueError as exc:
            raise ConfigError(f"{name} is not an ISO date: {value!r}") from exc
    if name == "countries":
        if isinstance(value, str):
            value = [c for c in value.split(",") if c]
        return tuple(str(c).strip() for c in value)
    if name == "adapter_command":
        if isinstance(value, str):
            return tuple(shlex.split(value))
        return tuple(str(part) for part in value)
    if name == "peak_window":
        parts = list(value)
        if len(parts) != 2:
            raise ConfigError(f"peak_window needs two values, got {value!r}")
        return (int(parts[0]), int(parts[1]))
    if name == "lang":
        return None if value is None else str(value)
    if name in ("sample_k", "seed", "min_city_population", "min_matches",
                "negation_window", "max_batch", "top_k"):
        if isinstance(value, bool):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        try:
            return int(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} must be an integer, got {value!r}") from exc
    if name in ("dead_band", "adapter_timeout"):
        try:
            return float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} must be a number, got {value!r}") from exc
    if name == "drop_retweets":
        if not isinstance(value, bool):
            raise ConfigError(f"drop_retweets must be true or false, got {value!r}")
        return value
    if name == "scorer":
        return str(value)
    return value


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config file into a raw key/value mapping."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return raw


def build_config(
    file_values: Optional[Mapping[str, Any]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    *,
    config_dir: Optional[Path] = None,
) -> RunConfig:
    """Merge config-file values and flag overrides into a RunConfig.

    `overrides` entries that are None mean "not given" and are skipped,
    so absent flags never mask config-file values.
    """
    merged: dict[str, Any] = {}
    for source, base_dir in ((file_values, config_dir), (overrides, None)):
        if not source:
            continue
        unknown = sorted(set(source) - _FIELD_NAMES)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for name, value in source.items():
            if source is overrides and value is None:
                continue
            merged[name] = _coerce(name, value, base_dir)
    missing = [name for name in _REQUIRED_PATHS if merged.get(name) is None]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}")
    return RunConfig(**merged)
