"""Exception types shared across the package.

The CLI maps these onto exit codes: parameter and domain problems are
usage errors (exit 2), numeric and parse failures are runtime errors
(exit 1).
"""


class ParameterError(ValueError):
    """An argument is outside its documented domain (wrong type, range, or combination)."""


class DomainError(ValueError):
    """Input data violates a filter's value precondition (e.g. negative pixels)."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""


class PgmParseError(ValueError):
    """A PGM stream could not be decoded.

    Carries the byte offset where decoding failed; the offset is also
    embedded in the message.
    """

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset
