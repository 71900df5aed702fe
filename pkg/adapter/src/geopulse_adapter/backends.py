"""Scoring backends.

A backend exposes a model_name string and score_batch(texts), returning one
(top_label, top_probability) pair per text with labels already canonical
("positive", "negative", "neutral") and probabilities in [0, 1]. The
neutral-threshold policy is applied by the request loop, not here.
"""

from __future__ import annotations

import hashlib
import logging
from typing import Protocol

from geopulse_adapter.config import AdapterConfig

log = logging.getLogger(__name__)

_CANONICAL = ("positive", "negative", "neutral")


class BackendLoadError(RuntimeError):
    """Raised when a backend cannot be constructed or its model loaded."""


class Backend(Protocol):
    model_name: str

    def score_batch(self, texts: list[str]) -> list[tuple[str, float]]: ...


def load_backend(config: AdapterConfig) -> Backend:
    """Build the backend named by config.model.

    "mock" and "identity" select the hash scorer; anything else is treated
    as a transformers checkpoint identifier.
    """
    if config.model in ("mock", "identity"):
        return MockBackend(config)
    return TransformersBackend(config)


class MockBackend:
    """Deterministic stand-in scorer that loads no weights.

    The positive-class probability is a 53-bit hash of the text, so results
    are stable across processes and platforms but carry no meaning. Exists
    so protocol behavior can be exercised without any model.
    """

    def __init__(self, config: AdapterConfig) -> None:
        self.model_name = config.model

    def score_batch(self, texts: list[str]) -> list[tuple[str, float]]:
        return [self._score(text) for text in texts]

    @staticmethod
    def _score(text: str) -> tuple[str, float]:
        digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
        p_positive = (int.from_bytes(digest, "big") >> 11) / float(1 << 53)
        if p_positive >= 0.5:
            return "positive", p_positive
        return "negative", 1.0 - p_positive


class TransformersBackend:
    """Sequence-classification model hosted through the transformers library.

    Class names are mapped to the canonical labels by inspecting the
    checkpoint's id2label table; bare LABEL_<k> names fall back to the usual
    two-class (negative, positive) and three-class (negative, neutral,
    positive) index conventions.
    """

    _MAX_TOKENS = 128

    def __init__(self, config: AdapterConfig) -> None:
        try:
            import torch
            from transformers import (
                AutoModelForSequenceClassification,
                AutoTokenizer,
            )
        except Exception as exc:
            raise BackendLoadError(
                f"transformers backend unavailable: {exc}; install the "
                f"'transformers' extra or use --model mock"
            ) from exc
        self._torch = torch
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(config.model)
            self._model = AutoModelForSequenceClassification.from_pretrained(
                config.model
            )
        except Exception as exc:
            raise BackendLoadError(
                f"cannot load model {config.model!r}: {exc}"
            ) from exc
        self._device = _resolve_device(torch, config.device)
        self._model.to(self._device)
        self._model.eval()
        self._labels = _canonical_labels(self._model.config.id2label)
        self.model_name = config.model
        log.info(
            "loaded %s on %s with labels %s",
            config.model,
            self._device,
            self._labels,
        )

    def score_batch(self, texts: list[str]) -> list[tuple[str, float]]:
        encoded = self._tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self._MAX_TOKENS,
            return_tensors="pt",
        ).to(self._device)
        with self._torch.no_grad():
            logits = self._model(**encoded).logits
        probs = self._torch.softmax(logits, dim=-1)
        top = probs.max(dim=-1)
        return [
            (self._labels[int(index)], float(prob))
            for prob, index in zip(top.values, top.indices)
        ]


def _resolve_device(torch, hint: str) -> str:
    if hint == "auto":
        return "cuda" if torch.cuda.is_available() else "cpu"
    return hint


def _canonical_labels(id2label: dict[int, str]) -> dict[int, str]:
    """Map class indices to canonical label names, or fail loudly."""
    named: dict[int, str] = {}
    for index, raw in id2label.items():
        lowered = raw.lower()
        for canonical in _CANONICAL:
            if lowered.startswith(canonical[:3]):
                named[int(index)] = canonical
                break
    if len(named) == len(id2label):
        return named
    # LABEL_<k> style checkpoints carry no names; use index conventions.
    # A partial name match means the checkpoint is something else entirely,
    # and guessing indices for it would silently mislabel, so refuse.
    if not named and len(id2label) == 2:
        return {0: "negative", 1: "positive"}
    if not named and len(id2label) == 3:
        return {0: "negative", 1: "neutral", 2: "positive"}
    raise BackendLoadError(
        f"cannot map model labels {sorted(id2label.values())} onto "
        f"positive/negative/neutral"
    )
