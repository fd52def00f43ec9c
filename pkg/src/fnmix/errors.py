"""Exception hierarchy.

Input-shaped problems derive from :class:`InputError` (CLI exit code 1);
violated theorem hypotheses derive from :class:`PreconditionViolated`
(CLI exit code 2).
"""

from dataclasses import dataclass


class FnmixError(Exception):
    """Base class for all package errors."""


class InputError(FnmixError, ValueError):
    """Malformed or invalid input."""


class NotStochastic(InputError):
    pass


class NotReversible(InputError):
    pass


class Reducible(InputError):
    pass


class Periodic(InputError):
    pass


class NonPositivePi(InputError):
    pass


class NoConvergence(FnmixError, RuntimeError):
    pass


class EigensolverFailure(FnmixError, RuntimeError):
    pass


class DataMissing(InputError):
    pass


class InvalidData(InputError):
    pass


class PreconditionViolated(FnmixError):
    """A hypothesis of the bound being evaluated does not hold."""


class InsufficientSamples(PreconditionViolated):
    pass


class EtaTooLarge(PreconditionViolated):
    pass


class MinimumNUnmet(PreconditionViolated):
    def __init__(self, message, required_n):
        super().__init__(message)
        self.required_n = required_n


class GapTooSmall(PreconditionViolated):
    pass


class NotAttainedError(PreconditionViolated):
    """Raised where an integer mixing time is mandatory but none was found."""

    def __init__(self, n_max):
        super().__init__(f"mixing time not attained within n_max={n_max}")
        self.n_max = n_max


@dataclass(frozen=True)
class NotAttained:
    """Result marker: no step ``n <= n_max`` met the tolerance."""

    n_max: int

    def __bool__(self):
        return False

    def unwrap(self):
        raise NotAttainedError(self.n_max)
