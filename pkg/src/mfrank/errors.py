"""Exception hierarchy. Every error raised on purpose derives from MfrankError."""


class MfrankError(Exception):
    """Base class for library errors."""


class GraphParseError(MfrankError, ValueError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class CapacityError(MfrankError, OverflowError):
    """A node id or size does not fit the index representation."""


class EmptyGraphError(MfrankError, ValueError):
    pass


class UndefinedCorrelationError(MfrankError, ValueError):
    """Correlation requested for a constant (zero-variance) sequence."""


class TooLargeError(MfrankError, ValueError):
    """Dense solve refused because the graph exceeds the size guard."""


class ModelInvalidError(MfrankError, ValueError):
    """Model parameters for which the closed form does not exist."""


class FitError(MfrankError, ValueError):
    pass


class UnreachableRankError(MfrankError, ValueError):
    pass


class CalibrationError(MfrankError, ValueError):
    pass


class GenerationError(MfrankError, RuntimeError):
    pass
