"""Exception hierarchy.

Every error raised by the library carries a ``category`` string. The CLI
prints that category as the first token of its single-line error report,
so the set of categories is part of the command-line contract.
"""


class WardpopError(Exception):
    category = "Error"


class ParseError(WardpopError):
    category = "ParseError"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MalformedHeader(ParseError):
    pass


class TokenCountMismatch(ParseError):
    pass


class NonNumericToken(ParseError):
    pass


class SchemaError(WardpopError):
    category = "SchemaError"


class CrsMismatch(WardpopError):
    category = "CrsMismatch"


class IoFailure(WardpopError):
    category = "IoFailure"


class InvalidInput(WardpopError):
    """Bad argument values: out-of-range indices, wrong lengths, etc."""

    category = "InvalidInput"


class OutOfBounds(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class LengthMismatch(InvalidInput):
    pass


class EmptyInput(InvalidInput):
    pass


class NegativePopulation(InvalidInput):
    pass


class NonFinite(WardpopError):
    category = "NonFinite"


class EmptyDataset(InvalidInput):
    pass


class EmptyChain(InvalidInput):
    pass
