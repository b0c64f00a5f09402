"""Exception hierarchy shared by all gmur modules."""


class GmurError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GmurError):
    """Malformed or inconsistent caller input (wrong shape, bad flag, non-finite data)."""


class DomainError(GmurError):
    """Input is well-formed but violates a mathematical precondition."""


class ConvergenceError(GmurError):
    """An iterative kernel failed to converge; carries the offending operand."""

    def __init__(self, message, operand=None):
        super().__init__(message)
        self.operand = operand
