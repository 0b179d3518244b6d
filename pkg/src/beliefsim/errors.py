"""Exception hierarchy shared by every module."""


class BeliefSimError(Exception):
    """Base class for all errors raised by this package."""


# geometry
class OutOfBounds(BeliefSimError, ValueError):
    pass


class InvalidCell(BeliefSimError, ValueError):
    pass


class NoPath(BeliefSimError):
    pass


# belief core
class ShapeError(BeliefSimError, ValueError):
    pass


class DuplicateId(BeliefSimError, ValueError):
    pass


class UnknownId(BeliefSimError, KeyError):
    def __str__(self) -> str:  # KeyError would repr the message
        return str(self.args[0]) if self.args else "unknown id"


class UnknownClass(BeliefSimError, ValueError):
    """A detected class has no believed instances (1:1 mapping violated)."""


class Overfull(BeliefSimError, ValueError):
    """More detections of a class than believed instances (1:1 mapping violated)."""


# metric
class CardinalityMismatch(BeliefSimError, ValueError):
    pass


# world
class EventTargetsWall(BeliefSimError, ValueError):
    pass


# assistance
class UnknownActivity(BeliefSimError, KeyError):
    def __str__(self) -> str:
        return f"unknown activity {self.args[0]!r}" if self.args else "unknown activity"


# scenario documents
class ParseError(BeliefSimError, ValueError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class ValidationError(BeliefSimError, ValueError):
    pass
