"""Deterministic stdlib-only sentiment adapter used by the test suite.

Speaks the newline-delimited JSON stdio protocol: one handshake line at
startup, then one response per request line.  Labels and scores are
derived from a stable hash of the text, so runs are reproducible.
"""

import hashlib
import json
import sys

LABELS = ("positive", "negative", "neutral")


def score_text(text: str) -> tuple[str, float]:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    label = LABELS[digest[0] % 3]
    score = 0.5 + digest[1] / 510.0
    return label, round(score, 6)


def main() -> int:
    sys.stdout.write(json.dumps({"ready": True, "model": "echo-stub"}) + "\n")
    sys.stdout.flush()
    for line in sys.stdin:
        if not line.strip():
            continue
        request = json.loads(line)
        label, score = score_text(request["text"])
        response = {"id": request["id"], "label": label, "score": score}
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
