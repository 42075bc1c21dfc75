"""Exception hierarchy.

Every error is a ``ValueError`` so callers that only care about "bad input"
can catch one thing.  ``step`` carries the procedure step (A-D) an error was
raised in, ``axis`` the offending degree of freedom when there is one.
"""

from __future__ import annotations


class LocreqError(ValueError):
    def __init__(self, message: str, *, step: str | None = None, axis: str | None = None):
        self.step = step
        self.axis = axis
        self.detail = message
        super().__init__(self._format())

    def _format(self) -> str:
        prefix = f"[step {self.step}] " if self.step else ""
        return prefix + self.detail

    def with_step(self, step: str) -> "LocreqError":
        """Return a copy of this error labeled with a procedure step."""
        err = type(self).__new__(type(self))
        LocreqError.__init__(err, self.detail, step=step, axis=self.axis)
        return err


class DomainError(LocreqError):
    """An argument is outside the domain of a function."""


class MissingAxisError(LocreqError):
    """A degree of freedom is required but not defined."""


class AxisMismatchError(LocreqError):
    """Two per-axis vectors do not cover the same axes."""


class ContainmentError(LocreqError):
    """The Motion Space is not inside the Interest Space."""


class NegativeMarginError(LocreqError):
    """The safety margin exhausts the gap between Motion and Interest Space."""


class InfeasibleTimingError(LocreqError):
    """Motion during the time gap and latency alone exceeds the margin."""


class BudgetExhaustedError(LocreqError):
    """Lever-arm inflation consumes the whole translational budget."""


class MissingRepeatabilityError(LocreqError):
    """Repeatability data is required by the reference basis but absent."""


class ConfidenceMismatchError(LocreqError):
    """ILS percentiles are quoted at a lower confidence than required."""


class ConfigError(LocreqError):
    """A configuration file is malformed or violates an invariant."""

    def __init__(self, message: str, *, path: str = "", step: str | None = None,
                 axis: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message, step=step, axis=axis)
