"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EngineError):
    """Malformed input data.

    Carries a human-readable locus (line number, element path, or byte
    offset) pointing at the offending part of the input.
    """

    def __init__(self, message: str, locus: str | None = None):
        self.locus = locus
        super().__init__(f"{message} (at {locus})" if locus else message)


class EmptyGraphError(EngineError):
    """An operation that needs nodes or edges got a graph without them."""


class UnknownIdError(EngineError):
    """A node or community id that does not exist in the target graph."""


class UnknownEdgeError(EngineError):
    """An edge index outside the graph's edge table."""


class NoCommunitiesError(EngineError):
    """A hierarchy operation ran before any community structure exists."""


class InvalidStateError(EngineError):
    """A scene command that is not legal in the current state."""


class NumericalDivergenceError(EngineError):
    """A layout produced non-finite coordinates."""


class BindError(EngineError):
    """The server could not bind its listen port."""


class FormatError(EngineError):
    """A binary or JSON payload does not follow the wire format."""
