"""Exception hierarchy shared by every module."""


class GspinnError(Exception):
    pass


class UsageError(GspinnError, ValueError):
    """Caller violated a precondition (bad shapes, bad arguments)."""


class DomainError(GspinnError, ValueError):
    """Point outside the domain where a formula is defined."""


class NumericError(GspinnError, ArithmeticError):
    """Non-finite value produced during evaluation.

    ``layer`` is set when raised from the network forward pass, ``index`` when
    a specific collocation point is at fault, ``term`` names the loss term.
    """

    def __init__(self, message, *, layer=None, index=None, term=None):
        super().__init__(message)
        self.layer = layer
        self.index = index
        self.term = term


class FormatError(GspinnError, ValueError):
    """Corrupt or incompatible parameter file."""


class ConfigError(GspinnError, ValueError):
    """Invalid experiment configuration."""
