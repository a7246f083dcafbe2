"""Exception types shared across the package.

The CLI maps these onto its stable exit codes: file/format problems -> 2,
data/dimension validation -> 3, anything else -> 1.
"""


class DeepMlcError(Exception):
    """Base class for all package-specific errors."""


class ParseError(DeepMlcError):
    """A file could not be parsed. Carries the offending line when known."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)


class UnsupportedAttributeError(DeepMlcError):
    """An input file uses an attribute type outside the supported subset."""


class ValidationError(DeepMlcError):
    """Data content violates a contract (non-binary label, missing value, ...)."""


class DimensionMismatch(DeepMlcError):
    """Array shapes disagree with the model or with each other."""


class ModelStateError(DeepMlcError):
    """A model is missing a component required by the requested operation."""


class TrainingError(DeepMlcError):
    """Training produced non-finite parameters. Carries the epoch index."""

    def __init__(self, message, epoch=None):
        self.epoch = epoch
        super().__init__(message if epoch is None else f"epoch {epoch}: {message}")


class ModelTooLargeError(DeepMlcError):
    """Exact enumeration was requested for a model beyond the tractable size."""


class ConfigError(DeepMlcError):
    """An experiment config file violates the expected schema."""
