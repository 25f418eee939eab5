"""Exception types shared across the package."""


class AdlError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AdlError):
    """Malformed input text. Carries the offset of the offending token."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.position = position
        self.line = line
        where = ""
        if line is not None:
            where += f" (line {line})"
        if position is not None:
            where += f" at position {position}"
        super().__init__(message + where)


class SignatureError(AdlError):
    """A concept, role, or name is used but not declared."""


class ModelFormatError(AdlError):
    """A belief-model or knowledge-base file violates its format."""


class NotSimpleError(AdlError):
    """An operation required a simple terminological axiom set."""


class CyclicTBookError(AdlError):
    """An operation required an acyclic terminological axiom set."""


class ZeroProbabilityObservation(AdlError):
    """Conditioning on an observation whose prior probability is exactly zero."""


class CapExceededError(AdlError):
    """A configured enumeration or size cap was exceeded."""


class BudgetError(AdlError):
    """An invalid solver budget was supplied."""
