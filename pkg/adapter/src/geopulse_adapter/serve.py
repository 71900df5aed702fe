"""Request loop for the stdin/stdout scoring protocol.

Wire format, one JSON object per line:

    handshake  {"ready": true, "model": "<name>"}        server -> client, once
    request    {"id": "<string>", "text": "<string>"}    client -> server
    response   {"id": "<id>", "label": "positive"|"negative"|"neutral",
                "score": <float 0..1>}                   server -> client
    error      {"id": null, "error": "<message>"}        for a malformed line

The server answers every request line exactly once, keeps running after
malformed lines, and returns when the input stream closes.
"""

from __future__ import annotations

import json
import logging

from geopulse_adapter.backends import Backend
from geopulse_adapter.config import AdapterConfig

log = logging.getLogger(__name__)

_CHUNK_SIZE = 65536


def serve(config: AdapterConfig, backend: Backend, reader, writer) -> None:
    """Answer scoring requests until the input stream closes.

    reader.read(n) must behave like a raw pipe read: return at most n bytes,
    block only while nothing is available, and return b"" at end of stream.
    writer takes bytes. Requests arriving back to back are scored in batches
    of up to config.max_batch per backend call.
    """
    _emit(writer, {"ready": True, "model": backend.model_name})
    buffer = b""
    line_number = 0
    while True:
        chunk = reader.read(_CHUNK_SIZE)
        if not chunk:
            break
        buffer += chunk
        *lines, buffer = buffer.split(b"\n")
        line_number = _answer(config, backend, writer, lines, line_number)
    if buffer.strip():
        # final line may legitimately arrive without a trailing newline
        _answer(config, backend, writer, [buffer], line_number)
    log.info("input closed after %d lines", line_number + (1 if buffer.strip() else 0))


def _answer(
    config: AdapterConfig,
    backend: Backend,
    writer,
    lines: list[bytes],
    line_number: int,
) -> int:
    """Respond to a run of input lines, batching backend calls."""
    pending: list[tuple[str, str]] = []

    def flush() -> None:
        if not pending:
            return
        scored = backend.score_batch([text for _, text in pending])
        for (request_id, _), (label, probability) in zip(pending, scored):
            score = min(1.0, max(0.0, float(probability)))
            if score < config.neutral_threshold:
                label = "neutral"
            _emit(writer, {"id": request_id, "label": label, "score": score})
        pending.clear()

    for raw in lines:
        line_number += 1
        if not raw.strip():
            continue
        try:
            request_id, text = _parse_request(raw)
        except ValueError as exc:
            flush()  # keep responses in request order
            log.warning("line %d: %s", line_number, exc)
            _emit(writer, {"id": None, "error": str(exc)})
            continue
        pending.append((request_id, text))
        if len(pending) >= config.max_batch:
            flush()
    flush()
    return line_number


def _parse_request(raw: bytes) -> tuple[str, str]:
    try:
        obj = json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ValueError("request must be a JSON object")
    request_id = obj.get("id")
    if not isinstance(request_id, str):
        raise ValueError("request 'id' must be a string")
    text = obj.get("text")
    if not isinstance(text, str):
        raise ValueError("request 'text' must be a string")
    return request_id, text


def _emit(writer, obj: dict) -> None:
    writer.write(json.dumps(obj, separators=(",", ":")).encode("utf-8") + b"\n")
    writer.flush()
