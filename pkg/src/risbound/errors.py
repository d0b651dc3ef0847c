"""Exception hierarchy for the bound library.

Numerical routines raise these instead of returning sentinel values so the
CLI can map failure classes onto distinct exit codes.
"""

from __future__ import annotations


class RisBoundError(Exception):
    """Base class for all library errors."""


class DomainError(RisBoundError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UsageError(RisBoundError, ValueError):
    """An operation was called with an inconsistent combination of inputs."""


class UnsupportedConfigError(RisBoundError, ValueError):
    """A configuration outside the supported normalization was requested."""


class ConvergenceError(RisBoundError, RuntimeError):
    """An iterative evaluation failed to converge.

    Carries the partial result and an estimate of the truncation error so
    callers can decide whether the partial value is still usable.
    """

    def __init__(self, message: str, partial=None, truncation_bound=None):
        super().__init__(message)
        self.partial = partial
        self.truncation_bound = truncation_bound


class AccuracyError(RisBoundError, RuntimeError):
    """A quadrature did not reach its target accuracy.

    The achieved estimate is attached for diagnostic purposes.
    """

    def __init__(self, message: str, estimate=None, achieved_error=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_error = achieved_error


class RatioUnderflowError(RisBoundError, ArithmeticError):
    """A linear-domain cap-ratio evaluation underflowed to zero."""


class UnsatisfiableRateError(RisBoundError, ValueError):
    """The requested rate drives the cap ratio below representable range."""

    def __init__(self, message: str, n: int | None = None, rate: float | None = None):
        super().__init__(message)
        self.n = n
        self.rate = rate


class InterpretationError(RisBoundError, ValueError):
    """A square-root argument went negative, signalling a wrong variance slot."""


class UnresolvedFormulaError(RisBoundError, RuntimeError):
    """No candidate formula variant matched the numerical oracle."""


class OutOfRegimeError(RisBoundError, ValueError):
    """A closed-form expression was requested outside its validity region."""
