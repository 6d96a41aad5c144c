"""Exception types shared across the package.

Index errors on integral or orbital lookups use the builtin IndexError.
"""


class SqdkitError(Exception):
    """Base class so callers can catch everything from this package at once."""


class ParseError(SqdkitError, ValueError):
    """Malformed text input (integral file, sample file, parameter file, config).

    Carries the offending line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateError(SqdkitError, ValueError):
    """The same canonical entry appeared twice with conflicting values."""


class SectorError(SqdkitError, ValueError):
    """Operands live in different particle-number sectors."""


class ShapeError(SqdkitError, ValueError):
    """A parameter block has the wrong shape or violates a required symmetry."""


class LayoutError(SqdkitError, ValueError):
    """A sample register layout does not match the expected bit length."""


class RangeError(SqdkitError, ValueError):
    """A scalar argument lies outside its allowed range."""


class EmptyError(SqdkitError, ValueError):
    """An operation that needs at least one element received none."""


class CapacityError(SqdkitError, RuntimeError):
    """A requested space exceeds the configured capacity cap."""


class ConvergenceError(SqdkitError, RuntimeError):
    """An iterative solver exhausted its budget before reaching tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (best residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class ConfigError(SqdkitError, ValueError):
    """A run configuration is incomplete, inconsistent, or points at missing files."""


class StageError(SqdkitError, RuntimeError):
    """A pipeline stage failed; names the stage and chains the original cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.__cause__ = cause
