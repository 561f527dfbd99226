"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`TrscatError`.
The CLI maps :class:`DomainError` subclasses to exit status 1 and
:class:`UsageError` to exit status 2.
"""


class TrscatError(Exception):
    pass


class UsageError(TrscatError):
    """Malformed configuration, bad arguments or a missing input file."""


class ParseError(UsageError):
    """Syntax error in a potential expression; ``offset`` is a byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ParseError):
    pass


class DomainError(TrscatError):
    """A mathematical precondition does not hold for the given input."""


class IntegrationError(DomainError):
    pass


class EigenSolverError(DomainError):
    pass


class LocalizationError(DomainError):
    pass


class DecayFitError(DomainError):
    pass


class ConvergenceError(DomainError):
    pass


class SingularJacobianError(ConvergenceError):
    pass
