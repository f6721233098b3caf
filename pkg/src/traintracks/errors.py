"""Exception hierarchy shared by all modules."""


class TrackError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(TrackError):
    """The raw combinatorial data is not even a well-formed object.

    Distinct from an invariant violation: a structurally broken track
    cannot be traced or validated at all.
    """

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self):
        msg = super().__str__()
        if self.line is not None:
            pos = f"line {self.line}"
            if self.column is not None:
                pos += f", column {self.column}"
            return f"{pos}: {msg}"
        return msg


class PreconditionError(TrackError):
    """An operation was called on arguments outside its contract."""


class InvariantViolation(TrackError):
    """An internal consistency check failed; indicates a caller or engine bug."""


class UnsupportedCaseError(TrackError):
    """The requested computation falls outside the implemented cases."""
