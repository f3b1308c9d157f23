"""Exception hierarchy shared across the toolkit.

Input/validation problems raise subclasses of :class:`InputError`; the CLI
maps those to exit code 2 and anything else to exit code 1.
"""


class CorefkitError(Exception):
    """Base class for all toolkit errors."""


class InputError(CorefkitError):
    """Bad user input: malformed files, invalid annotations, bad config."""


class FormatError(InputError):
    """Malformed file content. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(InputError):
    """Structurally parseable input that violates a data-model invariant."""


class SyntheticSpecError(InputError):
    """Infeasible or malformed synthetic-corpus specification."""


class ConfigError(InputError):
    """Invalid run configuration or incompatible objective/annotation combo."""
