"""Exception hierarchy shared across the package.

Every error message is prefixed with the subsystem that raised it
("dataset: ...", "lda: ...") so the CLI can emit a single diagnostic line.
"""


class SlakitError(Exception):
    """Base class for all package errors."""


class ValidationError(SlakitError):
    """Bad input data or arguments (CLI exit code 1)."""


class InputError(SlakitError):
    """Unreadable, malformed, or missing files (CLI exit code 2)."""


class NumericalError(SlakitError):
    """Numerical failure such as a singular covariance (CLI exit code 3)."""
