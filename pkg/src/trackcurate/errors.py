class DataError(ValueError):
    """Bad input data or a computation that is undefined on the given data."""


class FormatError(DataError):
    """A file could not be parsed."""
