"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class EntailEvalError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EntailEvalError, ValueError):
    """A record or value violates a domain invariant."""


class ConfigError(EntailEvalError):
    """Invalid run or backend configuration."""


# --- gateway -----------------------------------------------------------------


class GatewayError(EntailEvalError):
    """Base class for failures while talking to a model backend."""


class NetworkError(GatewayError):
    """Transient transport failure; the gateway retries these."""


class AuthError(GatewayError):
    """Credentials missing or rejected. Fatal for the whole run."""


class CacheMiss(GatewayError):
    """Replay-only mode and the transcript cache has no entry for a request."""

    def __init__(self, key: str):
        super().__init__(f"no cached transcript for key {key}")
        self.key = key


class CacheFormatError(EntailEvalError):
    """A transcript file could not be imported."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


# --- response parsing ---------------------------------------------------------


class ResponseError(EntailEvalError):
    """A backend answered, but the answer cannot be used."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class EmptyResponse(ResponseError):
    pass


class ParseFailure(ResponseError):
    """No unique entailment label in a response."""


class NoStepsFound(ResponseError):
    """An inference explanation contained no numbered steps."""


class ScoreParseFailure(ResponseError):
    """No integer in 1..5 at the start of a scoring response."""


# --- statistics / harness -------------------------------------------------------


class AlignmentError(EntailEvalError, ValueError):
    """Parallel runs do not cover the same items in the same order."""


class DegenerateSample(EntailEvalError, ValueError):
    """A test statistic is undefined for the given samples."""


class DatasetError(EntailEvalError):
    """Too many invalid lines in an input dataset."""

    def __init__(self, message: str, errors: list[str] | None = None):
        super().__init__(message)
        self.errors = errors or []


class RunAborted(EntailEvalError):
    """Item failure rate exceeded the configured threshold."""
