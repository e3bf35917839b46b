"""Exception hierarchy shared by all modules."""


class MaxFdivError(ValueError):
    """Base class for input and domain errors raised by this package."""


class DomainError(MaxFdivError):
    pass


class LengthMismatch(MaxFdivError):
    pass


class DimensionMismatch(MaxFdivError):
    pass


class NotStrictlyConvex(MaxFdivError):
    pass


class NotOperatorConvex(MaxFdivError):
    pass


class InfiniteDivergence(MaxFdivError):
    pass


class SingularState(MaxFdivError):
    pass


class NotPSD(MaxFdivError):
    pass


class NotNormalized(MaxFdivError):
    pass


class UnsupportedDimension(MaxFdivError):
    pass


class NotQubit(MaxFdivError):
    pass


class OutsideBall(MaxFdivError):
    pass


class InvalidParameters(MaxFdivError):
    pass


class NoConvergence(RuntimeError):
    """Raised when the SDP solver hits its Newton-step cap.

    The best certificate found so far is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
