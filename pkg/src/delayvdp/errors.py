"""Exception hierarchy shared by all modules."""


class DelayVdpError(Exception):
    """Base class for numerical failures raised by this package."""


class DomainError(DelayVdpError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ConvergenceError(DelayVdpError):
    """An iterative solver hit its iteration cap.

    ``residual`` carries the last residual seen, if any.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RegimeError(DelayVdpError):
    """The parameters left the regime a routine is valid in (e.g. J*tau >= 1)."""


class StepSizeError(DelayVdpError, ValueError):
    """Step size incompatible with the delay grid."""


class BlowUpError(DelayVdpError):
    """Trajectory left the overflow guard; ``time`` is when it happened."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class BracketError(DelayVdpError):
    """A bisection bracket does not enclose a sign/regime change.

    When raised after the iteration cap, ``bracket`` holds the best bracket
    found so far.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class InsufficientDataError(DelayVdpError):
    """Too few samples/crossings to make the requested decision."""
