"""Sequence-matching loop closure detection with pluggable frame descriptors."""

from seqlcd.errors import (
    ConfigError,
    ImageFormatError,
    LatentFileError,
    ManifestError,
    EvaluationError,
    SeqLcdError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EvaluationError",
    "ImageFormatError",
    "LatentFileError",
    "ManifestError",
    "SeqLcdError",
    "__version__",
]
