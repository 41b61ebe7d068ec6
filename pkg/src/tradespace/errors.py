"""Error taxonomy shared across the library and the HTTP service.

Every failure mode callers are expected to branch on gets its own type.
The service layer maps these onto HTTP status codes in one place.
"""

from __future__ import annotations


class TradespaceError(Exception):
    """Base class for all library errors."""

    code = "error"


class ValidationError(TradespaceError):
    """Caller-supplied input violates a precondition."""

    code = "validation_error"


class NotFoundError(TradespaceError):
    """A referenced session, node, fragment, or dimension does not exist."""

    code = "not_found"


class ConflictError(TradespaceError):
    """Operation is legal in general but not in the session's current state."""

    code = "conflict"


class IntegrityError(TradespaceError):
    """The provenance graph would be left inconsistent (cycle, bad arity)."""

    code = "integrity_error"


class FormatError(TradespaceError):
    """A session document failed schema validation on import.

    ``path`` points at the offending field, e.g. ``nodes[2].scores``.
    """

    code = "format_error"

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class ParseError(TradespaceError):
    """A model response could not be turned into the expected payload.

    Carries the raw text so callers can log it or retry with a reminder.
    """

    code = "parse_error"

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class PartialResultError(ParseError):
    """Some, but not all, of a batched payload survived parsing.

    ``drafts`` holds whatever validated; callers decide whether to keep it.
    """

    code = "partial_result"

    def __init__(self, message: str, raw: str = "", drafts: list | None = None):
        super().__init__(message, raw)
        self.drafts = drafts or []


class ProviderError(TradespaceError):
    """The language-model provider failed (network, HTTP error, timeout)."""

    code = "provider_error"


class ConfigError(TradespaceError):
    """Bad configuration file or prompt template."""

    code = "config_error"
