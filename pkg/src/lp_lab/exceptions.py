"""Exception types raised across lp_lab."""


class LPLabError(Exception):
    """Base class for all lp_lab errors."""


class ValidationError(LPLabError, ValueError):
    """Bad input: a parameter out of range or a malformed set.

    ``field`` names the offending parameter when there is one.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class AliasingError(ValidationError):
    """The sampling grid is too coarse for the bandwidth in play."""


class ReliabilityError(LPLabError):
    """A numerical result would rest only on unreliable (sub-resolution) data."""


class InfeasibleShiftError(LPLabError):
    """No admissible shift exists for the truncated set.

    ``coverage`` is the fraction of the search window covered by
    translated components, ``witness`` carries extra diagnostics.
    """

    def __init__(self, message, coverage=None, witness=None):
        super().__init__(message)
        self.coverage = coverage
        self.witness = witness
