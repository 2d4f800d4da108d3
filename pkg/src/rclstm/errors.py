"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand dimensions are inconsistent."""


class DataFormatError(ValueError):
    """A data file could not be parsed; the message names the offending row."""


class InsufficientDataError(ValueError):
    """Not enough observations to build the requested windows or split."""


class EncodingError(ValueError):
    """A location ID is not present in the codebook."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss, gradient or state."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class CheckpointError(ValueError):
    """A checkpoint or cache stream is corrupt, truncated or has the wrong version."""


class ConfigError(ValueError):
    """A run configuration is malformed (unknown key, bad type or range)."""
