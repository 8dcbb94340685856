"""Exception hierarchy.

Parse errors, domain errors and size errors are kept apart so the CLI can
map them onto distinct exit codes.
"""


class BubbleError(Exception):
    """Base class for every error raised by this package."""


class ParseError(BubbleError, ValueError):
    pass


class InvalidCharacter(ParseError):
    pass


class EmptyGrid(ParseError):
    pass


class DomainError(BubbleError, ValueError):
    pass


class EmptyConfiguration(DomainError):
    pass


class InvalidRatio(DomainError):
    pass


class EtaOutOfRange(DomainError):
    pass


class ParamOutOfRange(DomainError):
    pass


class Type2Inadmissible(DomainError):
    pass


class LambdaOutOfRange(DomainError):
    pass


class PoleAtEndpoint(DomainError):
    pass


class InvalidGrid(DomainError):
    pass


class TooLarge(DomainError):
    pass
