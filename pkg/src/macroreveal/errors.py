"""Exception hierarchy shared by every module.

The CLI maps each class onto an exit status via ``exit_code``.
"""


class RevealError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class InvalidParameter(RevealError, ValueError):
    pass


class ShapeError(RevealError, ValueError):
    pass


class ImageTooSmall(RevealError, ValueError):
    pass


class NumericError(RevealError, ArithmeticError):
    exit_code = 3


class ParseError(RevealError):
    """Malformed PGM header; ``offset`` is the byte position of the fault."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedFormat(RevealError):
    pass


class TruncatedData(RevealError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ValidationError(RevealError):
    """Pipeline script / spec problem, located by line and column (1-based)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column
