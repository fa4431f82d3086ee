"""Exception hierarchy shared across the toolchain.

Everything raised on purpose derives from :class:`CspmonError`, so callers
(and the CLI) can separate tool diagnostics from genuine bugs.
"""

from __future__ import annotations


class CspmonError(Exception):
    """Base class for all errors raised by this package."""


class SpecParseError(CspmonError):
    """Syntax error in a specification, assertion script, or trace literal.

    Carries a 1-based position so diagnostics can point at the offending
    token.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class DuplicateDefinition(SpecParseError):
    pass


class ResolveError(CspmonError):
    """Static error found while resolving a parsed specification."""


class UnboundName(ResolveError):
    pass


class TypeMismatch(ResolveError):
    pass


class NonFiniteSet(ResolveError):
    pass


class UnknownChannel(ResolveError):
    pass


class BadPayload(ResolveError):
    pass


class StateSpaceExceeded(CspmonError):
    """Raised when an exploration grows past the configured state cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"state space exceeded configured cap of {cap} configurations")


class SessionNotRunning(CspmonError):
    """Raised when stepping a monitor session that already reached a verdict."""


class MappingError(CspmonError):
    """Problem while loading a mapping file or translating a raw event."""


class UnmatchedEvent(MappingError):
    pass


class PayloadOutOfRange(MappingError):
    pass
