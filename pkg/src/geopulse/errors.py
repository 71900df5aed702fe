"""Exception types shared across the package.

Per-row problems in input files are not exceptions: loaders skip the row,
log a warning with its line number, and keep going.  The classes here are
the conditions that abort an operation outright.
"""

from __future__ import annotations


class GeopulseError(Exception):
    """Base class for all errors raised by this package."""


class MissingFileError(GeopulseError):
    """A required input file does not exist."""


class EmptyPatternSetError(GeopulseError):
    """Tried to compile an automaton from zero patterns."""


class EmptyGazetteerError(GeopulseError):
    """No gazetteer entries survived filtering."""


class EmptyRangeError(GeopulseError):
    """No scheduled day falls inside the requested date range."""


class UnscheduledDateError(GeopulseError):
    """A record's timestamp does not fall on any scheduled day."""


class CorruptCorpusError(GeopulseError):
    """More than the tolerated share of input lines were malformed."""


class UnreadableStreamError(GeopulseError):
    """The tweet input stream failed mid-read."""


class MalformedCsvError(GeopulseError):
    """A CSV input is structurally broken (missing column, bad cell)."""


class ConstantSeriesError(GeopulseError):
    """Pearson correlation is undefined for a zero-variance series."""


class ConfigError(GeopulseError):
    """The run configuration is invalid."""


class AdapterError(GeopulseError):
    """Base class for external scorer adapter failures."""


class AdapterCrashedError(AdapterError):
    """The adapter process exited while work was outstanding."""


class ProtocolViolationError(AdapterError):
    """The adapter sent a response that breaks the wire contract."""


class AdapterTimeoutError(AdapterError):
    """The adapter missed a response deadline."""
