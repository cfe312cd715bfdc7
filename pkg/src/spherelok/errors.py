"""Exception types shared across the package."""


class FormatError(ValueError):
    """A serialized coefficient or plan file is malformed."""


class NumericError(RuntimeError):
    """A numerical contract was violated (solver failure, corrupt data)."""
