"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
NumericError -> 3.
"""


class CooccurnetError(Exception):
    """Base class for all package errors."""


class UsageError(CooccurnetError):
    """Invalid flags, config files, or argument combinations."""


class DataError(CooccurnetError):
    """Malformed or insufficient input data."""


class CorpusError(DataError):
    """Corpus files that violate the documented schema."""


class NumericError(CooccurnetError):
    """Undefined or degenerate numeric results (zero variance, etc.)."""
