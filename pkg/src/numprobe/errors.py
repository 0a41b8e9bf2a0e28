"""Exception types shared across the package."""


class NumprobeError(Exception):
    """Base class for all package errors."""


class ParseError(NumprobeError):
    """A numeral surface string could not be parsed to a value."""

    def __init__(self, raw: str, detail: str = ""):
        self.raw = raw
        msg = f"cannot parse numeral {raw!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class RenderError(NumprobeError):
    """A value cannot be represented in the requested surface style."""


class SchemaError(NumprobeError):
    """An artifact record violates its schema. Carries the offending line."""

    exit_code = 3

    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.path = path
        self.line = line
        loc = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(f"{loc}{message}")


class MissingInputError(NumprobeError):
    """A pipeline stage's input file does not exist."""

    exit_code = 2


class AdapterError(NumprobeError):
    """An external adapter process failed unrecoverably."""

    exit_code = 4
