"""Exception types shared across the engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class EmptyTextError(EngineError):
    """Raised when text to embed is empty or whitespace-only."""

    def __init__(self, message: str = "text is empty or whitespace-only", index: int | None = None):
        if index is not None:
            message = f"{message} (batch index {index})"
        super().__init__(message)
        self.index = index


class RemoteUnavailableError(EngineError):
    """The remote embedding service could not be reached or answered badly."""


class DuplicateIdError(EngineError):
    """An id that must be unique is already present."""


class DimensionMismatchError(EngineError):
    """A vector's dimension does not match the index or embedder dimension."""


class UnknownIdError(EngineError):
    """A referenced id does not exist."""


class InvalidTreeError(EngineError):
    """A query tree violates its structural invariants (duplicate node ids)."""


class DegenerateCentroidError(EngineError):
    """A group centroid has near-zero norm and cannot be normalized."""


class TooFewPointsError(EngineError):
    """An operation requires more input points than were given."""


class OutOfRangeError(EngineError):
    """A numeric argument is outside its permitted range."""


class CycleDetectedError(EngineError):
    """Attaching an entity would create a cycle in the parent/child graph."""


class CrossMapLinkError(EngineError):
    """Parent and child entities live on different maps."""


class CorpusFormatError(EngineError):
    """A corpus file record is malformed."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
