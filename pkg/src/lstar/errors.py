"""Exception types raised across the package."""


class LStarError(ValueError):
    """Base class for every error raised by :mod:`lstar`."""


class StructuralError(LStarError):
    """Array shapes or basic structure do not match."""


class InvalidMetricError(LStarError):
    """A Gram matrix is not symmetric positive definite."""


class NotSemisimpleError(LStarError):
    pass


class InvalidCartanError(LStarError):
    pass


class DegeneracyError(LStarError):
    """A numerical splitting could not be resolved within tolerance.

    Usually fixed by loosening ``tol`` or ``rank_rtol``.
    """


class BoundViolationError(LStarError):
    pass


class SpecError(LStarError):
    """Invalid family / parameter combination."""


class TypeMismatchError(LStarError):
    pass


class InvalidInvolutionError(LStarError):
    pass


class SignMismatchError(LStarError):
    pass


class ConditioningError(LStarError):
    pass


class DegeneratePlaneError(LStarError):
    pass


class InvalidPointError(LStarError):
    pass


class InvalidDirectionError(LStarError):
    pass


class ParameterError(LStarError):
    pass
