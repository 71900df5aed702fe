"""Sentiment scoring for topical tweets.

Two scorers share one output type: a built-in valence-lexicon scorer
(zero dependencies, used when no model is configured) and a client for an
external model process speaking newline-delimited JSON over stdio.

The external protocol, in full:

* handshake: the adapter prints ``{"ready": true, "model": "<name>"}``
  once at startup;
* request: ``{"id": "<string>", "text": "<string>"}``, one per line;
* response: ``{"id": ..., "label": "positive"|"negative"|"neutral",
  "score": <float 0..1>}``, one per line, any order within a batch;
* shutdown: this side closes the adapter's stdin; the adapter must exit 0
  within 10 seconds.
"""

from __future__ import annotations

import json
import logging
import queue
import re
import subprocess
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    AdapterCrashedError,
    AdapterTimeoutError,
    MissingFileError,
    ProtocolViolationError,
)
from .matcher import normalize

logger = logging.getLogger(__name__)

DEFAULT_DEAD_BAND = 0.05
DEFAULT_NEGATION_WINDOW = 3
DEFAULT_MAX_BATCH = 64
DEFAULT_BATCH_TIMEOUT = 60.0
SHUTDOWN_GRACE_SECONDS = 10.0

# Alphanumeric runs; underscore is punctuation here, same as the matcher's
# word-boundary rule.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class SentimentLabel(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


_PROTOCOL_LABELS = {label.value: label for label in SentimentLabel}


@dataclass(frozen=True)
class SentimentScore:
    label: SentimentLabel
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")


@dataclass(frozen=True)
class ValenceLexicon:
    entries: Mapping[str, float]
    negation_tokens: frozenset[str] = frozenset()
    negation_window: int = DEFAULT_NEGATION_WINDOW

    def __post_init__(self) -> None:
        if self.negation_window < 1:
            raise ValueError("negation window must be at least 1")
        for token, weight in self.entries.items():
            if not -1.0 <= weight <= 1.0:
                raise ValueError(f"valence weight out of range for {token!r}: {weight}")


def default_valence_path() -> Path:
    return Path(__file__).parent / "data" / "valence.tsv"


def load_valence(
    path: str | Path, *, negation_window: int = DEFAULT_NEGATION_WINDOW
) -> ValenceLexicon:
    """Parse "token<TAB>weight" rows; a literal weight of "negation" marks
    a negation token instead.  Malformed rows are skipped with a warning.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(str(path))
    entries: dict[str, float] = {}
    negations: set[str] = set()
    skipped = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            token = normalize(fields[0]).strip() if fields else ""
            if len(fields) != 2 or not token:
                logger.warning("%s line %d: expected token<TAB>weight, row skipped", path, lineno)
                skipped += 1
                continue
            value = fields[1].strip()
            if value == "negation":
                negations.add(token)
                continue
            try:
                weight = float(value)
            except ValueError:
                logger.warning("%s line %d: bad weight %r, row skipped", path, lineno, value)
                skipped += 1
                continue
            if not -1.0 <= weight <= 1.0:
                logger.warning("%s line %d: weight out of range, row skipped", path, lineno)
                skipped += 1
                continue
            entries[token] = weight
    if skipped:
        logger.warning("%s: skipped %d malformed valence rows", path, skipped)
    return ValenceLexicon(entries, frozenset(negations), negation_window)


def score_lexicon(
    text: str, vl: ValenceLexicon, *, dead_band: float = DEFAULT_DEAD_BAND
) -> SentimentScore:
    """Average the valence of recognized tokens and label by dead band.

    A token within ``negation_window`` tokens after a negation token
    contributes with its sign flipped.  The mean score s over valence
    hits maps to Positive (s > dead_band), Negative (s < -dead_band), or
    Neutral, whose confidence decays linearly from 1 at s = 0 to 0 at the
    band edge.
    """
    if dead_band <= 0:
        raise ValueError("dead band must be positive")
    tokens = _TOKEN_RE.findall(normalize(text))
    raw = 0.0
    hits = 0
    last_negation: Optional[int] = None
    for i, token in enumerate(tokens):
        weight = vl.entries.get(token)
        if weight is not None:
            if last_negation is not None and 0 < i - last_negation <= vl.negation_window:
                weight = -weight
            raw += weight
            hits += 1
        if token in vl.negation_tokens:
            last_negation = i
    s = raw / max(1, hits)
    if s > dead_band:
        return SentimentScore(SentimentLabel.POSITIVE, min(1.0, s))
    if s < -dead_band:
        return SentimentScore(SentimentLabel.NEGATIVE, min(1.0, -s))
    confidence = 1.0 - min(1.0, abs(s)) / dead_band
    return SentimentScore(SentimentLabel.NEUTRAL, min(1.0, max(0.0, confidence)))


class AdapterClient:
    """Client for one external scorer process.

    The constructor spawns the process and blocks until the handshake
    line arrives.  A background thread drains stdout into a queue so
    per-batch deadlines hold even when the process stops responding.
    Batches are serialized: at most one is in flight per process.
    """

    def __init__(
        self,
        command: Sequence[str],
        *,
        max_batch: int = DEFAULT_MAX_BATCH,
        timeout: float = DEFAULT_BATCH_TIMEOUT,
    ) -> None:
        if max_batch < 1:
            raise ValueError("max_batch must be at least 1")
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        self.max_batch = max_batch
        self.timeout = timeout
        self._closed = False
        try:
            # stderr is inherited so adapter logs stay visible and the
            # adapter can never block on an undrained stderr pipe
            self._proc = subprocess.Popen(
                list(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterCrashedError(f"could not start adapter: {exc}") from exc
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._reader = threading.Thread(
            target=self._drain, name="adapter-stdout", daemon=True
        )
        self._reader.start()
        self.model = self._handshake()

    def _drain(self) -> None:
        try:
            for line in self._proc.stdout:
                self._lines.put(line)
        finally:
            self._lines.put(None)

    def _abort(self) -> None:
        self._closed = True
        try:
            self._proc.kill()
        except OSError:
            pass
        self._proc.wait()

    def _next_line(self, deadline: float) -> str:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise AdapterTimeoutError("adapter response deadline exceeded")
        try:
            line = self._lines.get(timeout=remaining)
        except queue.Empty:
            raise AdapterTimeoutError("adapter response deadline exceeded") from None
        if line is None:
            raise AdapterCrashedError(
                f"adapter closed its output (exit code {self._proc.poll()})"
            )
        return line

    @staticmethod
    def _parse_line(line: str) -> dict:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolationError(f"bad JSON from adapter: {line!r}") from exc
        if not isinstance(obj, dict):
            raise ProtocolViolationError(f"expected a JSON object, got: {line!r}")
        return obj

    def _handshake(self) -> str:
        deadline = time.monotonic() + self.timeout
        try:
            obj = self._parse_line(self._next_line(deadline))
            if obj.get("ready") is not True or not isinstance(obj.get("model"), str):
                raise ProtocolViolationError(f"bad handshake: {obj!r}")
        except Exception:
            self._abort()
            raise
        return obj["model"]

    def score(
        self, batch: Sequence[tuple[str, str]]
    ) -> list[tuple[str, SentimentScore]]:
        """Score (id, text) pairs, splitting into protocol-sized batches."""
        if self._closed:
            raise RuntimeError("adapter is closed")
        results: list[tuple[str, SentimentScore]] = []
        for i in range(0, len(batch), self.max_batch):
            results.extend(self._score_chunk(batch[i : i + self.max_batch]))
        return results

    def _score_chunk(
        self, chunk: Sequence[tuple[str, str]]
    ) -> list[tuple[str, SentimentScore]]:
        if not chunk:
            return []
        ids = [tweet_id for tweet_id, _ in chunk]
        for tweet_id in ids:
            if not isinstance(tweet_id, str):
                raise TypeError(f"ids must be strings, got {tweet_id!r}")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate ids in batch")
        deadline = time.monotonic() + self.timeout
        try:
            for tweet_id, text in chunk:
                self._proc.stdin.write(json.dumps({"id": tweet_id, "text": text}) + "\n")
            self._proc.stdin.flush()
        except OSError as exc:
            raise AdapterCrashedError(
                f"adapter died mid-batch (exit code {self._proc.poll()})"
            ) from exc

        pending = set(ids)
        scores: dict[str, SentimentScore] = {}
        while pending:
            obj = self._parse_line(self._next_line(deadline))
            tweet_id = obj.get("id")
            if not isinstance(tweet_id, str):
                raise ProtocolViolationError(f"response missing id: {obj!r}")
            if tweet_id not in pending:
                raise ProtocolViolationError(f"unexpected response id {tweet_id!r}")
            label_token = obj.get("label")
            label = _PROTOCOL_LABELS.get(label_token)
            if label is None:
                raise ProtocolViolationError(f"unknown label token {label_token!r}")
            raw_score = obj.get("score")
            if (
                isinstance(raw_score, bool)
                or not isinstance(raw_score, (int, float))
                or not 0.0 <= raw_score <= 1.0
            ):
                raise ProtocolViolationError(f"score out of range: {obj!r}")
            pending.remove(tweet_id)
            scores[tweet_id] = SentimentScore(label, float(raw_score))
        return [(tweet_id, scores[tweet_id]) for tweet_id in ids]

    def close(self) -> Optional[int]:
        """Close the adapter's stdin and wait for it to exit.

        A process still alive after the 10 s grace period is killed.
        Returns the exit code.  Safe to call more than once.
        """
        if self._closed:
            return self._proc.poll()
        self._closed = True
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
        except OSError:
            pass
        try:
            code = self._proc.wait(timeout=SHUTDOWN_GRACE_SECONDS)
        except subprocess.TimeoutExpired:
            logger.warning(
                "adapter did not exit within %.0fs of stdin closing, killing it",
                SHUTDOWN_GRACE_SECONDS,
            )
            self._proc.kill()
            code = self._proc.wait()
        if code != 0:
            logger.warning("adapter exited with code %s", code)
        return code

    def __enter__(self) -> "AdapterClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def score_external(
    batch: Iterable[tuple[str, str]], adapter: AdapterClient
) -> list[tuple[str, SentimentScore]]:
    """Score a batch through a running adapter, pairing responses by id.

    Results come back in request order regardless of the order the
    adapter answered in.
    """
    return adapter.score(list(batch))
