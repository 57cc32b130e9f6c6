"""Exception hierarchy shared by the package."""

from __future__ import annotations


class RankEnumError(Exception):
    """Base class for all package errors."""


class InvalidArgument(RankEnumError, ValueError):
    pass


class TransducerFormatError(RankEnumError, ValueError):
    """Malformed transducer description (carries a field path)."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class DocumentError(RankEnumError, ValueError):
    """Document symbol outside the declared alphabet."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        super().__init__(message)


class AmbiguityError(RankEnumError):
    """Two accepting runs produce the same output with different weights."""

    def __init__(self, document, run1, run2):
        self.document = document
        self.run1 = run1
        self.run2 = run2
        super().__init__(f"ambiguous on document {document!r}")


class SizeBoundExceeded(RankEnumError):
    pass


class NoPaths(RankEnumError):
    """The source cannot reach the sink."""


class AtRoot(RankEnumError):
    pass


class BranchOutOfRange(RankEnumError, IndexError):
    pass


class Infeasible(RankEnumError):
    """Linear system has no solution."""


class PreconditionError(RankEnumError, ValueError):
    pass


class BufferUnderrun(RankEnumError):
    """Epoch buffer drained before the next epoch's work finished."""
