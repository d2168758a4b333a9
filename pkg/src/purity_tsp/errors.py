"""Exception types shared across the toolkit.

Argument validation raises plain ValueError; the classes here cover the
failure modes that callers (and the CLI exit-code mapping) need to tell
apart.
"""


class CapacityError(RuntimeError):
    """An exact method was asked to run beyond its configured size cap."""


class TsplibParseError(ValueError):
    """Malformed or unsupported TSPLIB input.

    Carries the 1-based line number when the offending line is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateFitError(ValueError):
    """Curve fitting was attempted on fewer than two usable bins."""
