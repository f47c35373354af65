class OEMError(Exception):
    """Base class for errors raised by orthoem."""


class DomainError(OEMError, ValueError):
    """A penalty or solver parameter is outside its valid domain."""


class ConvergenceError(OEMError, RuntimeError):
    """An iterative numerical routine ran out of iterations.

    ``estimate`` holds the best value reached, when there is one.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DataError(OEMError, ValueError):
    """Input data could not be parsed or violates a precondition."""
