"""Exception types shared across the package."""


class LinrxError(Exception):
    """Base class for all errors raised by linrx."""


class NotPositiveDefinite(LinrxError, ValueError):
    """Cholesky factorisation failed; the matrix is singular or not Hermitian PD."""


class PoleAtNonpositiveInteger(LinrxError, ValueError):
    pass


class InadmissibleParameters(LinrxError, ValueError):
    """No contour separates the two pole families and no convergent series applies."""


class PrecisionLoss(LinrxError, ArithmeticError):
    """An evaluation finished with an error estimate above the requested tolerance.

    The attempted value and its error estimate are kept on the exception so the
    caller can decide whether to retry with a finer rule or accept the result.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class MaxDepthExceeded(LinrxError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class ConsistencyError(LinrxError, ArithmeticError):
    """Two independent evaluation routes disagree beyond their combined error."""


class ExcessiveRejections(LinrxError, RuntimeError):
    """Too many singular channel draws were rejected by the Monte Carlo sampler."""


class ConfigError(LinrxError, ValueError):
    """Invalid user configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
