"""Exception types raised across framelab."""


class FrameLabError(Exception):
    """Base class for all framelab errors."""


class SpaceMismatch(FrameLabError, ValueError):
    pass


class IndexOutOfRange(FrameLabError, IndexError):
    pass


class SingularOperator(FrameLabError):
    pass


class NotFinite(FrameLabError):
    """An operation needing a finite-dimensional space got a sequence space."""


class NotInvertible(FrameLabError):
    """Frame operator is not invertible. ``witness`` holds evidence when found."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UndecidedInvertibility(FrameLabError):
    """No witness of non-invertibility, but invertibility cannot be certified."""


class UnboundedCertificate(FrameLabError):
    pass


class ConditionOperatorSingular(FrameLabError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NormConditionViolated(FrameLabError):
    pass


class PreconditionError(FrameLabError):
    pass


class TooLarge(FrameLabError):
    pass


class GeneratorExhausted(FrameLabError):
    pass
