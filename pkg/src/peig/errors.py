"""Exception hierarchy shared by all modules.

The split mirrors how failures are reported at the command line:
usage and domain problems are the caller's fault, precondition
failures name the hypothesis that broke, and numerical errors carry
enough state to resume diagnosis.
"""

from __future__ import annotations


class PeigError(Exception):
    """Base class for every error raised by this package."""


class UsageError(PeigError):
    """Malformed configuration or command-line input."""


class ArgumentError(PeigError):
    """Arguments that violate an operation's contract (mismatched grids,
    too-coarse meshes, wrong branch, empty series)."""


class DomainError(PeigError):
    """Parameter outside the mathematical domain of definition."""


class RangeError(PeigError):
    """Requested target lies outside the attainable range."""


class HorizonError(PeigError):
    """No event found before the integration horizon; enlarge t_end."""


class PreconditionError(PeigError):
    """A theorem-level hypothesis failed on the supplied data."""

    def __init__(self, message: str, condition: str | None = None):
        super().__init__(message)
        self.condition = condition


class NumericalError(PeigError):
    """Numerical process failed (linear solve, eigensolver, stepper)."""


class IntegrationFailureError(NumericalError):
    """ODE stepper collapsed; ``last_time`` is the last good time."""

    def __init__(self, message: str, last_time: float):
        super().__init__(message)
        self.last_time = last_time


class ConvergenceError(NumericalError):
    """Iteration hit its budget; ``last_iterate`` holds the best state."""

    def __init__(self, message: str, last_iterate=None, diagnostics: dict | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.diagnostics = diagnostics or {}
