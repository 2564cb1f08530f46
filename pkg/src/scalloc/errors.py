"""Exception hierarchy shared by every stage of the allocation engine."""


class AllocError(Exception):
    """Base class for all engine errors."""


class DegenerateInput(AllocError):
    """Too few points, or all points collinear."""


class DuplicatePoint(AllocError):
    """A point coincides with an existing vertex."""

    def __init__(self, message, ids=()):
        super().__init__(message)
        self.ids = tuple(ids)


# build() reports every coincident group; insert() reports the single clash.
DuplicatePoints = DuplicatePoint


class PointInsideHull(AllocError):
    pass


class EmptyInput(AllocError):
    pass


class UnknownVertex(AllocError, KeyError):
    pass


class KTooLarge(AllocError):
    pass


class WOutOfRange(AllocError):
    pass


class InconsistentIds(AllocError):
    pass


class ZeroBaseline(AllocError):
    pass


class ParseError(AllocError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyAfterFilter(AllocError):
    pass


class StageError(AllocError):
    """Wraps a module error with the pipeline stage it came from."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
