"""Sentiment scoring server for the newline-delimited JSON stdio protocol.

A client starts this package as a subprocess, reads one handshake line,
writes one request object per line, and reads one response per request.
Closing the input stream shuts the server down.
"""

from geopulse_adapter.config import AdapterConfig, AdapterConfigError
from geopulse_adapter.backends import BackendLoadError, load_backend
from geopulse_adapter.serve import serve

__all__ = [
    "AdapterConfig",
    "AdapterConfigError",
    "BackendLoadError",
    "load_backend",
    "serve",
]
