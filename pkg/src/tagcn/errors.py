"""Exception hierarchy shared across the toolkit."""


class TagcnError(Exception):
    """Base class for all errors raised by this package."""


class GraphConstructionError(TagcnError):
    pass


class IndexOutOfRangeError(GraphConstructionError):
    pass


class DuplicateEdgeError(GraphConstructionError):
    pass


class IsolatedVertexError(GraphConstructionError):
    pass


class NonPositiveDegreeError(TagcnError):
    pass


class DirectedLaplacianError(TagcnError):
    pass


class DimensionMismatchError(TagcnError):
    pass


class PathLengthTooLargeError(TagcnError):
    pass


class WrongOperatorKindError(TagcnError):
    pass


class NotDiagonalizableError(TagcnError):
    pass


class TooLargeError(TagcnError):
    pass


class NotStronglyConnectedError(TagcnError):
    pass


class DegenerateDominantEigenvalueError(TagcnError):
    pass


class ZeroProjectionError(TagcnError):
    pass


class InvalidRateError(TagcnError):
    pass


class EmptyMaskError(TagcnError):
    pass


class StaleStateError(TagcnError):
    pass


class ShapeMismatchError(TagcnError):
    pass


class EmptyListError(TagcnError):
    pass


class FormatError(TagcnError):
    """Dataset file does not conform to the neutral text format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SplitOverlapError(TagcnError):
    pass


class LabelOutOfRangeError(TagcnError):
    pass
