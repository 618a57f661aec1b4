"""Exception types raised by solvers and numerical kernels."""


class PikappaError(Exception):
    """Base class for all library errors."""


class DomainError(PikappaError):
    """An evaluation was requested outside its mathematical domain
    (e.g. the kappa=1 jump functional with eta >= beta diverges)."""


class NonConvergence(PikappaError):
    """Both evaluation paths of a dual-route computation missed tolerance."""


class ModelValidationError(PikappaError):
    """A solver was handed inputs that fail validation."""

    def __init__(self, report):
        self.report = report
        super().__init__("model validation failed:\n" + str(report))


class NoSolution(PikappaError):
    """No candidate policy certified after exhausting all regime branches."""


class NoThreshold(PikappaError):
    """No sign change found when bracketing a risk-aversion threshold."""


class BracketError(PikappaError):
    """A monotone inversion left the attainable range of the function."""


class CaseMismatch(PikappaError):
    """Mutual-fund endpoints landed in different regime case families."""


class NoRoot(PikappaError):
    """The mutual-fund combination function has no sign change in delta."""


class SOCViolation(PikappaError):
    """The portfolio-premium second-order condition fails on the bracket."""


class NoInteriorSolution(PikappaError):
    """The portfolio-premium first-order condition is sign-definite on (0,1)."""
