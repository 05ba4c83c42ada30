"""Exception types raised by tempvanet."""


class TempVanetError(Exception):
    """Base class for all user-facing errors."""


class TraceParseError(TempVanetError, ValueError):
    """Malformed trace input.

    ``line`` is the 1-based line number for CSV input, ``offset`` the byte
    offset for XML input; whichever does not apply is None.
    """

    def __init__(self, message, line=None, offset=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.offset = offset


class SchemaError(TraceParseError):
    """A required attribute or column is missing."""

    def __init__(self, attribute, line=None, offset=None):
        super().__init__(f"missing attribute {attribute!r}", line=line, offset=offset)
        self.attribute = attribute


class EmptyTraceError(TempVanetError, ValueError):
    pass


class ParameterError(TempVanetError, ValueError):
    pass


class BoundsError(TempVanetError, IndexError):
    pass
