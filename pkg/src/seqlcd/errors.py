"""Exception hierarchy shared across the package."""


class SeqLcdError(Exception):
    """Base class for all errors raised by this package."""


class ManifestError(SeqLcdError):
    """A sequence manifest violates the schema or one of its invariants."""


class ImageFormatError(SeqLcdError):
    """An image file cannot be decoded as 8-bit binary PGM/PPM."""


class LatentFileError(SeqLcdError):
    """A latent interchange file is malformed or truncated."""


class EvaluationError(SeqLcdError):
    """Evaluation preconditions are not met (e.g. degenerate candidate set)."""


class ConfigError(SeqLcdError):
    """A CLI/config value is missing or invalid; message carries the field path."""
