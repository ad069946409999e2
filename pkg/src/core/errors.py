"""
Exception hierarchy for Random Similarity Isolation Forest.
"""


class RSIFError(Exception):
    """Base class for every error raised by this package."""


class DatasetError(RSIFError, ValueError):
    """Malformed dataset files or a dataset that does not fit a model's schema."""


class DistanceError(RSIFError, ValueError):
    """Distance measure applied to an unsupported kind or incompatible payloads."""


class ConfigError(RSIFError, ValueError):
    """Invalid run configuration, fit parameters or distance configuration."""


class DegeneratePairError(RSIFError):
    """Reference pair whose members the distance cannot tell apart."""


class ModelFormatError(RSIFError):
    """Model file that is corrupt or written by an unsupported format version."""


class EvaluationError(RSIFError, ValueError):
    """Evaluation request that the labels cannot support."""
