"""Command line entry point."""

from __future__ import annotations

import argparse
import logging
import sys

from geopulse_adapter.backends import BackendLoadError, load_backend
from geopulse_adapter.config import AdapterConfig, AdapterConfigError
from geopulse_adapter.serve import serve

log = logging.getLogger("geopulse_adapter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geopulse-adapter",
        description=(
            "Serve sentiment scores over stdin/stdout as newline-delimited "
            "JSON. Prints a handshake line, then answers each request line "
            "with one response line; exits when stdin closes."
        ),
    )
    parser.add_argument(
        "--model",
        default="mock",
        help=(
            "checkpoint identifier for the transformers backend, or 'mock' "
            "for the deterministic no-weights scorer (default: mock)"
        ),
    )
    parser.add_argument(
        "--max-batch",
        type=int,
        default=64,
        metavar="N",
        help="score at most N back-to-back requests per model call (default: 64)",
    )
    parser.add_argument(
        "--device",
        default="cpu",
        help="device hint: cpu, cuda, or auto (default: cpu)",
    )
    parser.add_argument(
        "--neutral-threshold",
        type=float,
        default=0.5,
        metavar="P",
        help=(
            "label a response neutral when the top-class probability is "
            "below P, 0 <= P < 1 (default: 0.5)"
        ),
    )
    parser.add_argument(
        "--verbose",
        action="store_true",
        help="log at debug level (logs go to stderr)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = AdapterConfig(
            model=args.model,
            max_batch=args.max_batch,
            device=args.device,
            neutral_threshold=args.neutral_threshold,
        )
    except AdapterConfigError as exc:
        parser.error(str(exc))
    try:
        backend = load_backend(config)
    except BackendLoadError as exc:
        # no handshake has been sent; the client sees a failed startup
        log.error("%s", exc)
        return 1
    try:
        serve(config, backend, sys.stdin.buffer.raw, sys.stdout.buffer)
    except BrokenPipeError:
        log.error("output stream closed by peer")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
