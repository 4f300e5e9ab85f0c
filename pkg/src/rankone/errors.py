"""Exception hierarchy shared by the numerical modules."""


class RankOneError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RankOneError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class DegenerateChannelError(RankOneError, ValueError):
    """The channel carries (numerically) no Fisher information at w = 0."""


class DifferentiabilityError(RankOneError, ValueError):
    """The channel log-likelihood is not smooth enough at w = 0."""


class EvaluationError(RankOneError, ArithmeticError):
    """An integrand returned a non-finite value at a quadrature node."""


class InternalConsistencyError(RankOneError, RuntimeError):
    """A computed result violates an identity it must satisfy."""


class BracketingError(RankOneError, RuntimeError):
    """A bisection predicate takes the same value at both bracket ends."""


class CapacityError(RankOneError, ValueError):
    """An exact enumeration would exceed the configured state budget."""


class DivergenceError(RankOneError, ArithmeticError):
    """An iteration produced non-finite values."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration
